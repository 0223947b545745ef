import init, { spike, sve_vs_ou, delay } from "./pkg/svlab_wasm.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c"];

// Draws each series as a polyline of [x, y] pairs on shared axes.
function plot(canvas, series, opts = {}) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 36;
  ctx.clearRect(0, 0, w, h);
  const pts = series.flat();
  const xs = pts.map(p => p[0]);
  const ys = pts.map(p => p[1]).filter(Number.isFinite);
  const x0 = Math.min(...xs), x1 = Math.max(...xs);
  let y0 = opts.y0 ?? Math.min(...ys), y1 = Math.max(...ys);
  if (y1 === y0) y1 = y0 + 1;
  const sx = x => pad + (x - x0) / (x1 - x0 || 1) * (w - 2 * pad);
  const sy = y => h - pad / 2 - (y - y0) / (y1 - y0) * (h - pad);
  ctx.strokeStyle = "#999";
  ctx.strokeRect(pad, pad / 2, w - 2 * pad, h - pad);
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  ctx.fillText(y1.toPrecision(3), 2, pad / 2 + 10);
  ctx.fillText(y0.toPrecision(3), 2, h - pad / 2);
  ctx.fillText(x0.toPrecision(3), pad, h - 4);
  ctx.fillText(x1.toPrecision(3), w - pad - 30, h - 4);
  series.forEach((s, i) => {
    ctx.strokeStyle = COLORS[i % COLORS.length];
    ctx.lineWidth = opts.widths?.[i] ?? 1.2;
    ctx.beginPath();
    s.forEach(([x, y], k) => (k ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
    ctx.stroke();
  });
}

function scatter(canvas, pts, box) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const sx = x => (x - box[0]) / (box[1] - box[0]) * w;
  const sy = y => h - (y - box[2]) / (box[3] - box[2]) * h;
  ctx.fillStyle = "#d62728";
  for (const [re, im] of pts) {
    ctx.beginPath();
    ctx.arc(sx(re), sy(im), 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}

// Wires the sliders of a section to `run`, which receives their values.
function bind(id, run) {
  const root = document.getElementById(id);
  const inputs = [...root.querySelectorAll("input")];
  const out = root.querySelector(".out");
  const canvases = [...root.querySelectorAll("canvas")];
  const update = () => {
    const v = {};
    for (const el of inputs) {
      v[el.name] = Number(el.value);
      el.nextElementSibling.textContent = el.value;
    }
    try {
      out.classList.remove("err");
      out.textContent = run(v, canvases);
    } catch (e) {
      out.classList.add("err");
      out.textContent = String(e);
    }
  };
  inputs.forEach(el => el.addEventListener("input", update));
  update();
}

await init();

bind("spike", (v, [top, bottom]) => {
  const d = JSON.parse(spike(v.beta, v.n, v.eps));
  plot(top, [d.curve], { y0: 0 });
  const n0 = 2;
  plot(bottom, [
    d.s_epsilon.map((s, i) => [i + n0, s]),
    d.windows.map((w, i) => [i + n0, d.windows.slice(0, i + 1).reduce((a, b) => a + b, 0)]),
  ], { y0: 0 });
  const last = d.s_epsilon[d.s_epsilon.length - 1];
  return `max peak ${Math.max(...d.heights).toFixed(3)}   S_N(ε) ${last.toFixed(5)}   (red: Σ I_n)`;
});

bind("ou", (v, [canvas]) => {
  const d = JSON.parse(sve_vs_ou(v.rate, v.forcing, v.sigma, 10, 0.005, v.seed));
  plot(canvas, [d.t.map((t, k) => [t, d.sve[k]]), d.t.map((t, k) => [t, d.ou[k]])], { widths: [2.5, 1] });
  return `max |X − Y| = ${d.max_gap.toExponential(3)}   (blue: SVE, red: OU)`;
});

bind("delay", (v, [canvas]) => {
  const d = JSON.parse(delay(v.a, v.tau, 20, 0.005));
  plot(canvas, [d.t.map((t, k) => [t, d.resolvent[k]])]);
  const roots = d.roots.map(([re, im]) => `${re.toFixed(4)} ± ${im.toFixed(4)}i`).join("\n  ");
  return `verdict: ${d.verdict}   (aτ = ${(v.a * v.tau).toFixed(3)}, threshold π/2)\nroots:\n  ${roots}`;
});
