import init, { routingSummary, latencyHeatmap, driftDemo } from "./pkg/trispirit_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
const COLORS = { reflex: "#4caf50", habit: "#9c27b0", agent: "#2196f3", super: "#f44336" };

function showSliders() {
  for (const id of ["tau_r", "gamma_r", "tau_a", "gamma_a"]) $(id + "_v").textContent = num(id).toFixed(2);
  $("shift_v").textContent = num("shift").toFixed(2);
}

function runRouting() {
  showSliders();
  try {
    const s = JSON.parse(routingSummary(num("seed"), num("n"), num("tau_r"), num("gamma_r"), num("tau_a"), num("gamma_a"), $("habit").checked));
    $("paths").innerHTML = Object.entries(s.path_pct)
      .map(([p, pct]) => `<span class="bar" title="${p} ${pct.toFixed(1)}%" style="width:${pct * 4}px;background:${COLORS[p]}"></span>`)
      .join("");
    $("summary").textContent =
      `mean latency   ${s.mean_latency_ms.toFixed(1)} ms  [${s.latency_ci[0].toFixed(1)}, ${s.latency_ci[1].toFixed(1)}]\n` +
      `cloud baseline ${s.cloud_latency_ms.toFixed(1)} ms  (reduction ${s.reduction_pct.toFixed(1)}%)\n` +
      `mean energy    ${s.mean_energy_mj.toFixed(2)} mJ\n` +
      `model calls    ${s.mean_calls.toFixed(3)} per task\n` +
      `offline        ${s.offline_pct.toFixed(1)}%\n` +
      Object.entries(s.path_pct).map(([p, pct]) => `${p.padEnd(14)} ${pct.toFixed(1)}%`).join("\n");
  } catch (e) {
    $("paths").textContent = "";
    $("summary").textContent = "error: " + e;
  }
}

function runHeatmap() {
  try {
    const h = JSON.parse(latencyHeatmap(num("seed"), num("n"), num("gamma_r"), num("gamma_a")));
    const ctx = $("heatmap").getContext("2d");
    const cell = 40, pad = 40;
    const lo = Math.min(...h.latency_ms), hi = Math.max(...h.latency_ms);
    ctx.clearRect(0, 0, 440, 440);
    h.latency_ms.forEach((v, i) => {
      const row = Math.floor(i / 10), col = i % 10;
      const t = hi > lo ? (v - lo) / (hi - lo) : 0;
      ctx.fillStyle = `rgb(${Math.round(255 * t)}, ${Math.round(80 + 120 * (1 - t))}, ${Math.round(255 * (1 - t))})`;
      ctx.fillRect(pad + col * cell, (9 - row) * cell, cell - 1, cell - 1);
    });
    ctx.fillStyle = "#222";
    ctx.font = "10px sans-serif";
    h.tau_r.forEach((v, i) => ctx.fillText(v.toFixed(2), pad + i * cell + 8, 415));
    h.tau_a.forEach((v, i) => ctx.fillText(v.toFixed(2), 4, (9 - i) * cell + 24));
    const worst = Math.max(...h.latency_ms);
    $("heatmap-info").textContent =
      `latency range ${lo.toFixed(1)} – ${hi.toFixed(1)} ms; cloud ${h.cloud_latency_ms.toFixed(1)} ms; ` +
      `worst cell ${(100 * (1 - worst / h.cloud_latency_ms)).toFixed(1)}% below cloud`;
  } catch (e) {
    $("heatmap-info").textContent = "error: " + e;
  }
}

function runDrift() {
  showSliders();
  try {
    const d = JSON.parse(driftDemo(num("seed"), num("samples"), num("dims"), num("shift")));
    $("drift-out").textContent =
      `MMD² = ${d.mmd2.toFixed(4)} (bandwidth ${d.bandwidth.toFixed(3)}, threshold ${d.threshold})\n` +
      (d.drifted ? "drift detected: the habit policy would be revoked" : "in distribution: the habit policy stays deployed");
  } catch (e) {
    $("drift-out").textContent = "error: " + e;
  }
}

await init();
for (const id of ["seed", "n", "tau_r", "gamma_r", "tau_a", "gamma_a", "habit"]) $(id).addEventListener("input", runRouting);
for (const id of ["shift", "samples", "dims", "seed"]) $(id).addEventListener("input", runDrift);
$("heatmap-run").addEventListener("click", runHeatmap);
runRouting();
runDrift();
