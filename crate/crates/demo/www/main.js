import init, { tail_curves, quasi_stationary, bound_report } from "./pkg/qstime_demo.js";

const $ = (id) => document.getElementById(id);

function call(fn, ...args) {
  const v = JSON.parse(fn(...args));
  if (v.error) throw new Error(v.error);
  return v;
}

// Axes on a log-x scale; series is a list of {ys, color}, hlines of {y, color}.
function plot(canvas, xs, series, hlines, yMax) {
  const ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height, pad = 36;
  ctx.clearRect(0, 0, W, H);
  const pos = xs.filter((x) => x > 0);
  const lo = Math.log10(pos[0]), hi = Math.log10(pos[pos.length - 1]);
  const X = (x) => pad + ((Math.log10(Math.max(x, pos[0])) - lo) / (hi - lo)) * (W - pad - 8);
  const Y = (y) => H - pad - (y / yMax) * (H - pad - 8);
  ctx.strokeStyle = "#999";
  ctx.beginPath();
  ctx.moveTo(pad, 8); ctx.lineTo(pad, H - pad); ctx.lineTo(W - 8, H - pad);
  ctx.stroke();
  ctx.fillStyle = "#555";
  ctx.font = "11px sans-serif";
  for (let e = Math.ceil(lo); e <= Math.floor(hi); e++) {
    ctx.fillText(`1e${e}`, X(10 ** e) - 10, H - pad + 14);
  }
  ctx.fillText("t", W - 16, H - pad + 26);
  for (const f of [0, 0.5, 1]) ctx.fillText((f * yMax).toPrecision(2), 2, Y(f * yMax) + 4);
  for (const { y, color } of hlines) {
    ctx.strokeStyle = color;
    ctx.setLineDash([4, 3]);
    ctx.beginPath(); ctx.moveTo(pad, Y(y)); ctx.lineTo(W - 8, Y(y)); ctx.stroke();
  }
  ctx.setLineDash([]);
  for (const { ys, color } of series) {
    ctx.strokeStyle = color;
    ctx.lineWidth = 1.5;
    ctx.beginPath();
    xs.forEach((x, i) => (i ? ctx.lineTo(X(x), Y(ys[i])) : ctx.moveTo(X(x), Y(ys[i]))));
    ctx.stroke();
    ctx.lineWidth = 1;
  }
}

function drawTails(graph, set) {
  const c = call(tail_curves, graph, set, 200);
  plot($("tails"), c.t, [
    { ys: c.tail_pi, color: "#1f5fbf" },
    { ys: c.tail_alpha, color: "#c0392b" },
  ], [], 1);
  const top = Math.min(1, 1.15 * Math.max(c.ab_error, c.r_m, ...c.gap));
  plot($("gap"), c.t, [{ ys: c.gap, color: "#333" }], [
    { y: c.pi_a, color: "#27ae60" },
    { y: c.r_m, color: "#8e44ad" },
    { y: Math.min(c.ab_error, top), color: "#d35400" },
  ], top);
}

// Layout: 2-d tori on their grid, everything else on a ring.
function layout(graph, n) {
  const m = /^torus:d=2,m=(\d+)$/.exec(graph.replace(/\s/g, ""));
  if (m) {
    const side = +m[1];
    return { grid: side, at: (v) => [v % side, Math.floor(v / side)] };
  }
  return { grid: 0, at: (v) => [Math.cos((2 * Math.PI * v) / n), Math.sin((2 * Math.PI * v) / n)] };
}

function heat(v) {
  const r = Math.round(255 * Math.min(1, 2 * v));
  const g = Math.round(255 * Math.max(0, 2 * v - 1));
  return `rgb(${r},${g},${Math.round(80 * (1 - v))})`;
}

function drawQsd(graph, set) {
  const q = call(quasi_stationary, graph, set);
  const canvas = $("qsd"), ctx = canvas.getContext("2d");
  const W = canvas.width, H = canvas.height;
  ctx.clearRect(0, 0, W, H);
  const max = Math.max(...q.alpha_m);
  const inA = new Set(q.target);
  const L = layout(graph, q.n);
  for (let v = 0; v < q.n; v++) {
    const [a, b] = L.at(v);
    let x, y, r;
    if (L.grid) {
      const cell = Math.min(W, H) / L.grid;
      x = (a + 0.5) * cell + (W - cell * L.grid) / 2;
      y = (b + 0.5) * cell;
      r = cell * 0.45;
    } else {
      x = W / 2 + a * (H / 2 - 20);
      y = H / 2 + b * (H / 2 - 20);
      r = Math.max(2, Math.min(10, 600 / q.n));
    }
    ctx.fillStyle = inA.has(v) ? "#000" : heat(q.alpha_m[v] / max);
    ctx.beginPath(); ctx.arc(x, y, r, 0, 2 * Math.PI); ctx.fill();
  }
  $("components").innerHTML =
    `<table><tr><td>component</td><td>size</td><td>&lambda;</td><td>E<sub>&alpha;</sub>[T<sub>A</sub>]</td><td></td></tr>` +
    q.components
      .map((c) => `<tr><td>${c.id}</td><td>${c.vertices.length}</td><td>${c.lambda.toExponential(4)}</td>` +
        `<td>${c.mean_hit.toFixed(4)}</td><td>${c.is_max ? "M" : ""}</td></tr>`)
      .join("") + "</table>";
}

function drawReport(graph, set) {
  const r = call(bound_report, graph, set);
  const scalars = ["n", "pi_A", "r_m", "t_rel", "t_med", "e_pi_t_a", "e_alpha_t_a", "ab_error", "refined_error",
    "tmed_error", "err_no_c0", "beta_gamma", "i0", "i1"];
  const fmt = (v) => (typeof v === "number" ? (Number.isInteger(v) ? v : v.toExponential(5)) : "");
  const rows = scalars.filter((k) => r[k] !== null && r[k] !== undefined)
    .map((k) => `<tr><td>${k}</td><td>${fmt(r[k])}</td></tr>`);
  const verdicts = Object.entries(r.verdicts).map(([k, v]) =>
    `<tr><td>${k}</td><td class="${v.pass ? "pass" : "fail"}">${v.pass ? "pass" : "FAIL"}</td>` +
    `<td>${v.kind}</td><td>${v.worst.toExponential(2)}</td></tr>`);
  $("report").innerHTML = `<table>${rows.join("")}</table><p></p><table>${verdicts.join("")}</table>`;
}

function run() {
  const graph = $("graph").value.trim(), set = $("set").value.trim();
  $("error").textContent = "";
  try {
    drawTails(graph, set);
    drawQsd(graph, set);
    drawReport(graph, set);
  } catch (e) {
    $("error").textContent = e.message;
  }
}

await init();
$("go").addEventListener("click", run);
run();
