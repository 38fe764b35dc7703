import init, { asymmetry_curve, chsh_curve, chsh_optimum, simulate } from "./pkg/kaonbell_wasm.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const params = () => [num("gs"), num("gl"), num("dm")];

function report(f) {
  try {
    $("error").textContent = "";
    f();
  } catch (e) {
    $("error").textContent = String(e.message ?? e);
  }
}

// Draws series of [x, y] pairs; `dashed` series are drawn grey and dashed.
function plot(canvas, series, yRange) {
  const ctx = canvas.getContext("2d");
  const { width: w, height: h } = canvas;
  const pad = 40;
  ctx.clearRect(0, 0, w, h);
  const xs = series.flatMap((s) => s.points.map((p) => p[0]));
  const ys = series.flatMap((s) => s.points.map((p) => p[1]));
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = yRange ?? [Math.min(...ys), Math.max(...ys)];
  const sx = (x) => pad + ((x - x0) / (x1 - x0)) * (w - 2 * pad);
  const sy = (y) => h - pad - ((y - y0) / (y1 - y0 || 1)) * (h - 2 * pad);

  ctx.strokeStyle = "#888";
  ctx.lineWidth = 1;
  ctx.setLineDash([]);
  ctx.strokeRect(pad, pad, w - 2 * pad, h - 2 * pad);
  ctx.fillStyle = "#444";
  ctx.font = "12px sans-serif";
  for (let i = 0; i <= 4; i++) {
    const x = x0 + ((x1 - x0) * i) / 4;
    const y = y0 + ((y1 - y0) * i) / 4;
    ctx.fillText(x.toFixed(2), sx(x) - 12, h - pad + 16);
    ctx.fillText(y.toFixed(2), 2, sy(y) + 4);
  }

  for (const s of series) {
    ctx.strokeStyle = s.color;
    ctx.setLineDash(s.dashed ? [6, 4] : []);
    ctx.lineWidth = s.dashed ? 1 : 2;
    ctx.beginPath();
    s.points.forEach(([x, y], i) => (i ? ctx.lineTo(sx(x), sy(y)) : ctx.moveTo(sx(x), sy(y))));
    ctx.stroke();
  }
}

function rows(flat, width) {
  const out = [];
  for (let i = 0; i < flat.length; i += width) out.push(Array.from(flat.subarray(i, i + width)));
  return out;
}

function drawAsymmetry() {
  const r = rows(asymmetry_curve(...params(), num("alpha"), num("amax"), 301), 4);
  plot($("asym"), [
    { color: "#000", points: r.map((q) => [q[0], q[1]]) },
    { color: "#c33", points: r.map((q) => [q[0], q[2]]) },
    { color: "#36c", points: r.map((q) => [q[0], q[3]]) },
  ]);
}

function drawChsh() {
  const tmax = num("cmax");
  const r = rows(chsh_curve(...params(), num("psched"), tmax, 401), 3);
  plot(
    $("chsh"),
    [
      { color: "#999", dashed: true, points: [[0, -1], [tmax, -1]] },
      { color: "#999", dashed: true, points: [[0, 0], [tmax, 0]] },
      { color: "#000", points: r.map((q) => [q[0], q[1]]) },
      { color: "#393", points: r.map((q) => [q[0], q[2]]) },
    ],
    [-1.3, 0.3],
  );
  const [tau, s] = chsh_optimum(...params(), tmax);
  $("optimum").textContent =
    `Minimum of the renormalized S: ${s.toFixed(5)} at τ = ${tau.toFixed(4)} τ_S` +
    (s < -1 ? " (violates the local bound −1)" : " (no violation)");
}

function runMonteCarlo() {
  const s = JSON.parse(
    simulate(...params(), $("model").value, num("t1"), num("t2"), num("events"), num("seed")),
  );
  const inside = s.a_hat >= s.lower - 3 * s.sigma && s.a_hat <= s.upper + 3 * s.sigma;
  $("mc").textContent = [
    `model            ${s.model}`,
    `events           ${s.n_events}  (undecayed pairs ${s.undecayed_pairs})`,
    `like / unlike    ${s.like} / ${s.unlike}`,
    `A estimate       ${s.a_hat.toFixed(5)} ± ${s.sigma.toFixed(5)}`,
    `local interval   [${s.lower.toFixed(5)}, ${s.upper.toFixed(5)}]  ${inside ? "contains estimate" : "MISSES estimate"}`,
    `quantum A        ${s.a_qm.toFixed(5)}`,
  ].join("\n");
}

await init();
$("draw-asym").onclick = () => report(drawAsymmetry);
$("draw-chsh").onclick = () => report(drawChsh);
$("run").onclick = () => report(runMonteCarlo);
report(drawAsymmetry);
report(drawChsh);
