import init, { Demo } from "./pkg/traj_manifold_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const color = (t, n) => `hsl(${Math.round((360 * t) / Math.max(n, 1))}, 70%, 45%)`;

let demo = null;

function status(text) {
  $("status").textContent = text;
}

function clear(canvas) {
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  return ctx;
}

function axes(ctx, w, h, pad, xLabel, yLabel) {
  ctx.strokeStyle = "#888";
  ctx.beginPath();
  ctx.moveTo(pad, pad);
  ctx.lineTo(pad, h - pad);
  ctx.lineTo(w - pad, h - pad);
  ctx.stroke();
  ctx.fillStyle = "#444";
  ctx.fillText(xLabel, w / 2, h - 6);
  ctx.fillText(yLabel, 4, pad - 8);
}

function legend(n) {
  $("legend").innerHTML = Array.from(
    { length: n },
    (_, t) => `<span><i style="background:${color(t, n)}"></i>traj${t}</span>`,
  ).join("");
}

function generate() {
  try {
    demo = new Demo(
      $("family").value,
      num("trajectories"),
      num("points"),
      num("noise"),
      BigInt(num("seed")),
    );
    legend(demo.trajectoryCount());
    status(`${demo.pointCount()} points in ${demo.trajectoryCount()} trajectories`);
    embed();
  } catch (e) {
    demo = null;
    status(`error: ${e}`);
  }
}

function drawScatter(result, labels, n) {
  const canvas = $("scatter");
  const ctx = clear(canvas);
  const xy = result.coords();
  const pts = result.points();
  let [x0, x1, y0, y1] = [Infinity, -Infinity, Infinity, -Infinity];
  for (let r = 0; r < pts.length; r++) {
    x0 = Math.min(x0, xy[2 * r]);
    x1 = Math.max(x1, xy[2 * r]);
    y0 = Math.min(y0, xy[2 * r + 1]);
    y1 = Math.max(y1, xy[2 * r + 1]);
  }
  const pad = 20;
  const span = Math.max(x1 - x0, y1 - y0) || 1;
  const s = (canvas.width - 2 * pad) / span;
  for (let r = 0; r < pts.length; r++) {
    ctx.fillStyle = color(labels[pts[r]], n);
    ctx.beginPath();
    ctx.arc(pad + (xy[2 * r] - x0) * s, canvas.height - pad - (xy[2 * r + 1] - y0) * s, 2.5, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function drawHistogram(chosenK) {
  const canvas = $("histogram");
  const ctx = clear(canvas);
  const pad = 30;
  if (chosenK.every((k) => k === 0)) {
    ctx.fillText("no neighborhood graph for this method", pad, canvas.height / 2);
    return;
  }
  const counts = new Map();
  for (const k of chosenK) counts.set(k, (counts.get(k) || 0) + 1);
  const ks = [...counts.keys()].sort((a, b) => a - b);
  const kMin = ks[0];
  const kMax = ks[ks.length - 1];
  const top = Math.max(...counts.values());
  const bw = (canvas.width - 2 * pad) / (kMax - kMin + 1);
  ctx.fillStyle = "#4a7";
  for (const [k, c] of counts) {
    const h = ((canvas.height - 2 * pad) * c) / top;
    ctx.fillRect(pad + (k - kMin) * bw, canvas.height - pad - h, Math.max(bw - 1, 1), h);
  }
  axes(ctx, canvas.width, canvas.height, pad, `chosen k (${kMin}..${kMax})`, `points (max ${top})`);
}

function embed() {
  if (!demo) return;
  try {
    const t0 = performance.now();
    const result = demo.embed($("method").value, num("k"), num("entropy"), num("maxExtra"));
    const ms = performance.now() - t0;
    const n = demo.trajectoryCount();
    drawScatter(result, demo.labels(), n);
    drawHistogram(result.chosenK());
    const excluded = demo.pointCount() - result.points().length;
    status(
      `${$("method").value}: residual variance at d=2 ${result.residualVariance.toFixed(4)}, ` +
        `cap fraction ${result.capFraction.toFixed(4)}, excluded ${excluded}, ${ms.toFixed(0)} ms`,
    );
    result.free();
  } catch (e) {
    status(`error: ${e}`);
  }
}

function curves() {
  if (!demo) return;
  try {
    const kMax = Math.min(num("kMax"), demo.pointCount() - 1);
    const values = demo.entropyByK(kMax);
    const n = demo.trajectoryCount();
    const canvas = $("entropyPlot");
    const ctx = clear(canvas);
    const pad = 30;
    const yMax = Math.max(Math.log2(n), 1e-9);
    for (let t = 0; t < n; t++) {
      ctx.strokeStyle = color(t, n);
      ctx.beginPath();
      for (let k = 1; k <= kMax; k++) {
        const x = pad + ((k - 1) / Math.max(kMax - 1, 1)) * (canvas.width - 2 * pad);
        const y = canvas.height - pad - (values[t * kMax + k - 1] / yMax) * (canvas.height - 2 * pad);
        k === 1 ? ctx.moveTo(x, y) : ctx.lineTo(x, y);
      }
      ctx.stroke();
    }
    const th = canvas.height - pad - (num("entropy") / yMax) * (canvas.height - 2 * pad);
    ctx.setLineDash([4, 4]);
    ctx.strokeStyle = "#000";
    ctx.beginPath();
    ctx.moveTo(pad, th);
    ctx.lineTo(canvas.width - pad, th);
    ctx.stroke();
    ctx.setLineDash([]);
    axes(ctx, canvas.width, canvas.height, pad, `k (1..${kMax})`, `mean entropy, bits (max ${yMax.toFixed(2)})`);
  } catch (e) {
    status(`error: ${e}`);
  }
}

await init();
$("generate").addEventListener("click", generate);
$("embed").addEventListener("click", embed);
$("curves").addEventListener("click", curves);
generate();
curves();
