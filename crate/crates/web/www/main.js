import init, { run_protocol, check_graph, verify_paper } from "./pkg/qwalk_web.js";

const $ = (id) => document.getElementById(id);

function fmt(x) {
  return x.toFixed(6);
}

function complexText([re, im]) {
  const r = Math.hypot(re, im);
  if (r < 5e-7) return "0";
  const th = Math.atan2(im, re);
  return Math.abs(th) < 5e-7 ? fmt(r) : `${fmt(r)}∠${fmt(th)}`;
}

function stateText(s) {
  return s ? "(" + s.amps.map(complexText).join(", ") + ")" : "-";
}

function showError(el, err) {
  el.innerHTML = "";
  const p = document.createElement("p");
  p.className = "error";
  p.textContent = String(err);
  el.appendChild(p);
}

function table(headers, rows) {
  const t = document.createElement("table");
  const head = t.insertRow();
  for (const h of headers) {
    const th = document.createElement("th");
    th.textContent = h;
    head.appendChild(th);
  }
  for (const row of rows) {
    const tr = t.insertRow();
    for (const cell of row) {
      const td = tr.insertCell();
      if (cell instanceof Node) td.appendChild(cell);
      else td.textContent = cell;
    }
  }
  return t;
}

function runProtocol() {
  const out = $("run-out");
  try {
    const res = JSON.parse(run_protocol($("scenario").value, $("amps").value));
    out.innerHTML = "";
    const summary = document.createElement("p");
    summary.textContent = `${res.protocol}: norm after walk ${fmt(res.norm_after_walk)}`;
    out.appendChild(summary);

    out.appendChild(table(
      ["position", "probability", ""],
      res.position_distribution.map((p, i) => {
        const bar = document.createElement("span");
        bar.className = "bar";
        bar.style.width = `${Math.round(p * 300)}px`;
        return [i, fmt(p), bar];
      }),
    ));

    const rows = res.outcomes
      .filter((o) => o.possible)
      .map((o) => [
        o.position_outcome,
        `f${o.coin1_outcome_index}`,
        fmt(o.probability),
        stateText(o.bob_state),
        o.has_recovery ? stateText(o.recovered_state) : "no recovery",
        o.fidelity_vs_input == null ? "-" : fmt(o.fidelity_vs_input),
      ]);
    out.appendChild(table(["position", "outcome", "probability", "Bob state", "recovered", "fidelity"], rows));
  } catch (e) {
    showError(out, e);
  }
}

function checkGraph() {
  const out = $("graph-out");
  try {
    const res = JSON.parse(check_graph($("graph").value.trim()));
    const pairs = (v) => (v.length ? v.map(([a, b]) => `(${a},${b})`).join(" ") : "none");
    out.textContent = [
      `${res.graph}: ${res.n_vertices} vertices, ${res.n_labels} labels, ${res.n_edges} edges`,
      `permutation: ${res.audit.is_permutation ? "yes" : "no"}`,
      `missing: ${pairs(res.audit.missing)}`,
      `colliding out: ${pairs(res.audit.colliding_out)}`,
      `colliding in: ${pairs(res.audit.colliding_in)}`,
    ].join("\n");
  } catch (e) {
    out.textContent = String(e);
  }
}

function audit() {
  const out = $("audit-out");
  try {
    const seed = Math.max(0, parseInt($("seed").value, 10) || 0);
    const res = JSON.parse(verify_paper($("variant").value, seed));
    out.innerHTML = "";
    out.appendChild(table(
      ["claim", "status", "what", "detail"],
      res.claims.map((c) => [c.claim_id, c.status, c.paper_location, c.detail]),
    ));
  } catch (e) {
    showError(out, e);
  }
}

await init();
$("run").addEventListener("click", runProtocol);
$("check").addEventListener("click", checkGraph);
$("audit").addEventListener("click", audit);
runProtocol();
checkGraph();
