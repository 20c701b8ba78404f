import init, { generate_graph, partition, compare_strategies, relaxation_curve } from "./pkg/mpart_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);
let graph = null;

function show(el, html) {
  $(el).innerHTML = html;
}

function guard(el, f) {
  try {
    f();
  } catch (e) {
    show(el, `<p class="err">${e}</p>`);
  }
}

function table(head, rows) {
  const th = head.map((h) => `<th>${h}</th>`).join("");
  const tr = rows.map((r) => "<tr>" + r.map((c) => `<td>${c}</td>`).join("") + "</tr>").join("");
  return `<table><tr>${th}</tr>${tr}</table>`;
}

const pct = (x) => (100 * x).toFixed(2) + "%";

function regenerate() {
  guard("graph-info", () => {
    graph = generate_graph(num("nodes"), num("dsp"), num("bram"), $("clustered").checked, num("seed"));
    const header = graph.split("\n").find((l) => !l.startsWith("%"));
    show("graph-info", `edges nodes resources: ${header}`);
  });
}

function runOne() {
  if (!graph) regenerate();
  guard("result", () => {
    const r = JSON.parse(partition(graph, $("strategy").value, num("runs"), num("imbalance"), num("seed")));
    show(
      "result",
      `<p>${r.strategy}: cut <b>${r.cut}</b>, ${r.feasible ? "feasible" : "infeasible"},
       ratio deviation ${pct(r.rur_deviation)}, ${r.remapped} nodes off their first personality,
       ${r.ms.toFixed(0)} ms</p>` +
        table(
          ["resource", "side 0", "side 1", "imbalance"],
          r.totals[0].map((t, i) => [i, t, r.totals[1][i], pct(r.imbalance[i])])
        )
    );
  });
}

function compareAll() {
  if (!graph) regenerate();
  guard("result", () => {
    const s = JSON.parse(compare_strategies(graph, num("runs"), num("imbalance"), num("seed")));
    show(
      "result",
      table(
        ["", ...s.strategies.map((x) => x.strategy)],
        [
          ["cut vs SM", ...s.strategies.map((x) => x.norm_cut.toFixed(2))],
          ["ratio deviation", ...s.strategies.map((x) => pct(x.rur_deviation))],
          ["time vs SM", ...s.strategies.map((x) => x.norm_time.toFixed(1))],
        ]
      )
    );
  });
}

function curve() {
  guard("curve-out", () => {
    const pts = JSON.parse(relaxation_curve(num("levels"), num("coarse"), num("imbalance"), $("geometric").checked));
    show("curve-out", table(["level", "margin"], pts.map((p) => [p.level, pct(p.margin)])));
  });
}

await init();
$("gen").onclick = regenerate;
$("run").onclick = runOne;
$("compare").onclick = compareAll;
$("curve").onclick = curve;
regenerate();
