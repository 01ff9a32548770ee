import init, { TreeDemo, lifecycle, churn } from "./pkg/bitfit_wasm.js";

const $ = (id) => document.getElementById(id);
const showError = (e) => { $("error").textContent = e ? String(e.message ?? e) : ""; };

let demo;
let leafBoxes = [];

function drawTree() {
  const canvas = $("tree");
  const ctx = canvas.getContext("2d");
  ctx.clearRect(0, 0, canvas.width, canvas.height);
  const bits = demo.bits();
  const changed = new Set(demo.changed());
  const n = demo.nLeaves;
  const depth = Math.log2(n);
  const rowH = (canvas.height - 40) / (depth + 1);
  const pos = (i) => {
    const level = Math.floor(Math.log2(i + 1));
    const first = (1 << level) - 1;
    const width = canvas.width / (1 << level);
    return { x: width * (i - first + 0.5), y: 20 + rowH * level + rowH / 2, level };
  };
  ctx.strokeStyle = "#bbb";
  for (let i = 1; i < bits.length; i++) {
    const a = pos(i), p = pos((i - 1) >> 1);
    ctx.beginPath(); ctx.moveTo(p.x, p.y); ctx.lineTo(a.x, a.y); ctx.stroke();
  }
  leafBoxes = [];
  const r = Math.max(5, Math.min(14, canvas.width / n / 2 - 2));
  for (let i = 0; i < bits.length; i++) {
    const { x, y } = pos(i);
    const slot = i - (n - 1);
    const phantom = slot >= demo.capacity;
    ctx.beginPath(); ctx.arc(x, y, r, 0, 2 * Math.PI);
    ctx.fillStyle = phantom ? "#ddd" : bits[i] ? "#d9534f" : "#5cb85c";
    ctx.fill();
    ctx.lineWidth = changed.has(i) ? 3 : 1;
    ctx.strokeStyle = changed.has(i) ? "#f0ad4e" : "#555";
    ctx.stroke();
    if (r >= 9) {
      ctx.fillStyle = "#fff"; ctx.font = "10px sans-serif"; ctx.textAlign = "center"; ctx.textBaseline = "middle";
      ctx.fillText(String(i), x, y);
    }
    if (slot >= 0 && !phantom) leafBoxes.push({ slot, x, y, r });
  }
}

function status(msg) {
  $("tree-status").textContent = `${msg}  |  free ${demo.freeCount}/${demo.capacity}  |  last op visited ${demo.lastSteps()} nodes`;
}

function resetTree() {
  demo = new TreeDemo(Number($("tree-cap").value));
  drawTree();
  status("fresh tree");
}

function wireTree() {
  $("tree-reset").onclick = resetTree;
  $("tree-cap").onchange = resetTree;
  $("tree-alloc").onclick = () => {
    try { const s = demo.allocate(); drawTree(); status(`allocate -> slot ${s}`); showError(); }
    catch (e) { showError(e); }
  };
  $("tree-scatter").onclick = () => {
    demo.scatter(0.7, BigInt(Math.floor(Math.random() * 1e9)));
    drawTree(); status("random 70% fill");
  };
  $("tree").onclick = (ev) => {
    const rect = ev.target.getBoundingClientRect();
    const x = ev.clientX - rect.left, y = ev.clientY - rect.top;
    const hit = leafBoxes.find((b) => Math.hypot(b.x - x, b.y - y) <= b.r + 2);
    if (!hit) return;
    const used = demo.bits()[hit.slot + demo.nLeaves - 1] === 1;
    try {
      if ($("tree-hint-mode").checked && used) {
        const s = demo.allocateNear(hit.slot);
        status(`allocate near ${hit.slot} -> slot ${s} (distance ${Math.abs(s - hit.slot)})`);
      } else if (used) {
        demo.release(hit.slot);
        status(`release ${hit.slot}`);
      } else {
        const s = demo.allocateNear(hit.slot);
        status(`slot ${hit.slot} is free; allocate near it -> ${s}`);
      }
      drawTree(); showError();
    } catch (e) { showError(e); }
  };
}

function metricsTable(el, header, rows) {
  el.innerHTML = `<tr>${header.map((h) => `<th>${h}</th>`).join("")}</tr>` +
    rows.map((r) => `<tr>${r.map((c) => `<td>${c}</td>`).join("")}</tr>`).join("");
}

const fmt = (r) => [r.sequential_fraction.toFixed(4), r.distinct_lines, r.mean_abs_gap.toFixed(1), r.traversal_len];

function runLifecycle() {
  try {
    const view = JSON.parse(lifecycle($("life-policy").value, Number($("life-nodes").value), 32, BigInt($("life-seed").value)));
    const canvas = $("life");
    const ctx = canvas.getContext("2d");
    ctx.clearRect(0, 0, canvas.width, canvas.height);
    const slots = view.second_slots;
    const n = slots.length;
    ctx.fillStyle = "#337ab7";
    for (let i = 0; i < n; i++) {
      const x = 10 + (canvas.width - 20) * (n > 1 ? i / (n - 1) : 0.5);
      const y = canvas.height - 10 - (canvas.height - 20) * (n > 1 ? slots[i] / (n - 1) : 0.5);
      ctx.fillRect(x, y, 2, 2);
    }
    metricsTable($("life-table"), ["traversal", "sequential", "distinct lines", "mean gap (B)", "length"], [
      ["first build", ...fmt(view.first)],
      ["rebuild", ...fmt(view.second)],
    ]);
    showError();
  } catch (e) { showError(e); }
}

function runChurn() {
  try {
    const rows = JSON.parse(churn(Number($("churn-cap").value), Number($("churn-fill").value),
      Number($("churn-ops").value), BigInt($("churn-seed").value)));
    metricsTable($("churn-table"), ["allocator", "sequential", "distinct lines", "mean gap (B)", "batch size"],
      rows.map((r) => [r.policy, ...fmt(r.batch)]));
    showError();
  } catch (e) { showError(e); }
}

await init();
wireTree();
resetTree();
$("life-run").onclick = runLifecycle;
$("churn-run").onclick = runChurn;
$("churn-fill").oninput = (e) => { $("churn-fill-v").textContent = Number(e.target.value).toFixed(2); };
runLifecycle();
runChurn();
