import init, { ScenarioDemo, predict_hull, relate_point_sets } from "./pkg/dogm_threat_web.js";

const COLOURS = { "threat": "#d62728", "no-threat": "#2ca02c", "on-trajectory": "#ff7f0e" };
const $ = (id) => document.getElementById(id);

// World-to-canvas transform for a world rectangle, y up.
function view(canvas, [x0, y0, x1, y1]) {
  const s = Math.min(canvas.width / (x1 - x0), canvas.height / (y1 - y0));
  return {
    s,
    x: (x) => (x - x0) * s,
    y: (y) => canvas.height - (y - y0) * s,
    inv: (px, py) => [px / s + x0, (canvas.height - py) / s + y0],
  };
}

function polygon(ctx, v, flat, stroke, fill) {
  if (flat.length < 4) return;
  ctx.beginPath();
  ctx.moveTo(v.x(flat[0]), v.y(flat[1]));
  for (let i = 2; i < flat.length; i += 2) ctx.lineTo(v.x(flat[i]), v.y(flat[i + 1]));
  ctx.closePath();
  if (fill) { ctx.fillStyle = fill; ctx.fill(); }
  if (stroke) { ctx.strokeStyle = stroke; ctx.stroke(); }
}

function cells(ctx, v, flat, size, colour) {
  ctx.fillStyle = colour;
  const w = Math.max(1, size * v.s);
  for (let i = 0; i < flat.length; i += 2) ctx.fillRect(v.x(flat[i]) - w / 2, v.y(flat[i + 1]) - w / 2, w, w);
}

// ---------------------------------------------------------------- scenario

let demo = null;
let timer = null;

function drawFrame() {
  if (!demo) return;
  const canvas = $("sc-canvas");
  const ctx = canvas.getContext("2d");
  const v = view(canvas, demo.bounds());
  const f = JSON.parse(demo.frame_json(Number($("sc-frame").value)));
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  polygon(ctx, v, demo.prior_lane(), null, "#e2e2e2");
  cells(ctx, v, f.attention_cells, f.cell_size, "rgba(255,191,0,0.35)");
  cells(ctx, v, f.cluster_cells, f.cell_size, "#555");
  polygon(ctx, v, f.ego_hull, "#1f77b4", "rgba(31,119,180,0.12)");
  for (const e of f.entries) {
    polygon(ctx, v, e.hull, COLOURS[e.status], "rgba(0,0,0,0.04)");
    polygon(ctx, v, e.bbox, COLOURS[e.status]);
  }
  ctx.setLineDash([4, 2]);
  polygon(ctx, v, f.ego_box, "#1f77b4");
  polygon(ctx, v, f.actor_box, "#000");
  ctx.setLineDash([]);
  const r = JSON.parse(demo.result_json());
  const fmt = (x) => (x === null ? "none" : x.toFixed(2));
  const statuses = f.entries.map((e) => `#${e.id} ${e.status} heading ${e.heading_deg.toFixed(1)} deg`).join(", ") || "no clusters";
  $("sc-info").textContent =
    `t = ${f.t.toFixed(1)} s   actor heading ${f.actor_heading_deg.toFixed(1)} deg   box contact: ${f.prior_contact}\n` +
    `${statuses}\n` +
    `ToC ${fmt(r.toc)} s   ToD ours ${fmt(r.tod_ours)} s   ToD prior ${fmt(r.tod_prior)} s   riTTR ${r.rittr === null ? "undefined" : (100 * r.rittr).toFixed(0) + " %"}`;
}

function simulate() {
  try {
    demo = new ScenarioDemo($("sc-kind").value, Number($("sc-horizon").value), Number($("sc-phi").value),
      Number($("sc-lag").value), BigInt($("sc-seed").value));
  } catch (e) {
    $("sc-info").textContent = String(e);
    demo = null;
    return;
  }
  $("sc-frame").max = demo.frame_count() - 1;
  $("sc-frame").value = 0;
  drawFrame();
}

function togglePlay() {
  if (timer) { clearInterval(timer); timer = null; $("sc-play").textContent = "Play"; return; }
  $("sc-play").textContent = "Pause";
  timer = setInterval(() => {
    const s = $("sc-frame");
    s.value = Number(s.value) >= Number(s.max) ? 0 : Number(s.value) + 1;
    drawFrame();
  }, 100);
}

// ---------------------------------------------------------------- prediction

function drawPrediction() {
  const canvas = $("pr-canvas");
  const ctx = canvas.getContext("2d");
  const v = view(canvas, [-60, -40, 60, 40]);
  const args = ["pr-heading", "pr-speed", "pr-horizon", "pr-phi"].map((id) => Number($(id).value));
  const [heading, speed, horizon, phi] = args;
  const hull = predict_hull(0, 0, heading, speed, 4.5, 1.8, horizon, phi);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  polygon(ctx, v, Array.from(hull), "#d62728", "rgba(214,39,40,0.12)");
  const a = (heading * Math.PI) / 180, c = Math.cos(a), s = Math.sin(a);
  const box = [[2.25, -0.9], [2.25, 0.9], [-2.25, 0.9], [-2.25, -0.9]].flatMap(([u, w]) => [u * c - w * s, u * s + w * c]);
  polygon(ctx, v, box, "#000", "#999");
  $("pr-info").textContent = `heading ${heading} deg, ${speed} m/s, T = ${horizon} s, phi_u = ${phi} deg: ${hull.length / 2} hull vertices`;
}

// ---------------------------------------------------------------- relation

const sets = { a: [], b: [] };

function drawRelation() {
  const canvas = $("rl-canvas");
  const ctx = canvas.getContext("2d");
  const v = view(canvas, [0, 0, 30, 20]);
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  for (const [key, colour] of [["a", "#d62728"], ["b", "#1f77b4"]]) cells(ctx, v, sets[key], 0.3, colour);
  if (sets.a.length === 0 || sets.b.length === 0) {
    $("rl-info").textContent = "add points to both sets";
    return;
  }
  const r = JSON.parse(relate_point_sets(new Float64Array(sets.a), new Float64Array(sets.b)));
  if (r.error) { $("rl-info").textContent = r.error; return; }
  polygon(ctx, v, r.hull_a, "#d62728", "rgba(214,39,40,0.1)");
  polygon(ctx, v, r.hull_b, "#1f77b4", "rgba(31,119,180,0.1)");
  $("rl-info").textContent = `relation: ${r.relation}\nstatus of A against B: ${r.status}`;
}

function addPoint(ev) {
  const canvas = $("rl-canvas");
  const rect = canvas.getBoundingClientRect();
  const v = view(canvas, [0, 0, 30, 20]);
  const [x, y] = v.inv(ev.clientX - rect.left, ev.clientY - rect.top);
  sets[ev.shiftKey ? "b" : "a"].push(x, y);
  drawRelation();
}

// ---------------------------------------------------------------- wiring

await init();
$("sc-run").addEventListener("click", simulate);
$("sc-frame").addEventListener("input", drawFrame);
$("sc-play").addEventListener("click", togglePlay);
for (const id of ["pr-heading", "pr-speed", "pr-horizon", "pr-phi"]) $(id).addEventListener("input", drawPrediction);
$("rl-canvas").addEventListener("click", addPoint);
$("rl-clear").addEventListener("click", () => { sets.a = []; sets.b = []; drawRelation(); });
simulate();
drawPrediction();
drawRelation();
