import init, { Demo, preset_graph, preset_spec } from "./pkg/dynq_web.js";

const $ = (id) => document.getElementById(id);
const SVG = "http://www.w3.org/2000/svg";
const COLORS = ["#2a6fdb", "#d9462b", "#2b9348", "#8e44ad"];
let demo = null;
let picked = null;

function el(tag, attrs) {
  const e = document.createElementNS(SVG, tag);
  for (const [k, v] of Object.entries(attrs)) e.setAttribute(k, v);
  return e;
}

function status(msg, bad) {
  $("status").textContent = msg;
  $("status").className = bad ? "err" : "";
}

function exec(line) {
  try {
    const out = demo.exec(line);
    $("log").textContent += line + "\n";
    status("");
    refresh();
    return out;
  } catch (e) {
    status(`${line}: ${e}`, true);
    return null;
  }
}

function layout(n, f) {
  const r = 90, cx = 120 + f * 260, cy = 120;
  return [...Array(n).keys()].map((i) => {
    const a = (2 * Math.PI * i) / n - Math.PI / 2;
    return [cx + r * Math.cos(a), cy + r * Math.sin(a)];
  });
}

function draw() {
  const k = demo.factors(), n = demo.nodes();
  const svg = el("svg", { width: 260 * k, height: 240 });
  svg.append(el("defs", {}));
  demo.symbols().forEach((_, s) => {
    const m = el("marker", { id: `arrow${s}`, viewBox: "0 0 10 10", refX: 18, refY: 5,
      markerWidth: 6, markerHeight: 6, orient: "auto" });
    m.append(el("path", { d: "M0,0 L10,5 L0,10 z", fill: COLORS[s % COLORS.length] }));
    svg.firstChild.append(m);
  });
  const e = demo.edges();
  for (let i = 0; i < e.length; i += 4) {
    const [f, u, s, v] = e.slice(i, i + 4);
    const pos = layout(n, f);
    const line = el("line", { x1: pos[u][0], y1: pos[u][1], x2: pos[v][0], y2: pos[v][1],
      stroke: COLORS[s % COLORS.length], "marker-end": `url(#arrow${s})` });
    const sym = demo.symbols()[s];
    const at = k > 1 ? ` @${f}` : "";
    line.style.cursor = "pointer";
    line.addEventListener("click", () => exec(`del ${sym} ${u} ${v}${at}`));
    svg.append(line);
  }
  for (let f = 0; f < k; f++) {
    layout(n, f).forEach(([x, y], i) => {
      const c = el("circle", { cx: x, cy: y, r: 14 });
      if (picked && picked[0] === f && picked[1] === i) c.classList.add("picked");
      c.addEventListener("click", () => pick(f, i));
      const t = el("text", { x, y: y + 5, "text-anchor": "middle", "pointer-events": "none" });
      t.textContent = i;
      svg.append(c, t);
    });
  }
  $("canvas").replaceChildren(svg);
}

function pick(f, i) {
  if (picked && picked[0] === f) {
    const at = demo.factors() > 1 ? ` @${f}` : "";
    const from = picked[1];
    picked = null;
    exec(`ins ${$("symbol").value} ${from} ${i}${at}`);
  } else {
    picked = [f, i];
    draw();
  }
}

function drawRules() {
  const rules = demo.rules();
  $("rules-box").hidden = rules.length === 0;
  $("rules").replaceChildren(...rules.map((row, r) => {
    const tr = document.createElement("tr");
    [...row].forEach((b, f) => {
      const td = document.createElement("td");
      td.textContent = b;
      td.addEventListener("click", () => exec(`flip ${r} ${f}`));
      tr.append(td);
    });
    return tr;
  }));
}

function refresh() {
  draw();
  drawRules();
  const out = demo.exec("query");
  $("answer").textContent = out === "" ? "(empty)" : out;
}

function fillPreset() {
  const p = $("program").value;
  $("graph").value = preset_graph(p);
  $("spec").value = preset_spec(p);
}

function load() {
  try {
    demo = new Demo($("program").value, $("graph").value, $("spec").value);
  } catch (e) {
    status(String(e), true);
    return;
  }
  picked = null;
  $("symbol").replaceChildren(...demo.symbols().map((s) => new Option(s, s)));
  $("log").textContent = "";
  status("");
  refresh();
}

await init();
$("program").addEventListener("change", () => { fillPreset(); load(); });
$("load").addEventListener("click", load);
$("run").addEventListener("click", () => {
  const out = exec($("line").value);
  if (out) $("answer").textContent = out;
});
fillPreset();
load();
