// Expects the wasm-bindgen output in ./pkg; see the README for the build steps.
import init, { pmfCurves, fluidCurves, qoeCurve } from "./pkg/playout_wasm.js";

const COLORS = ["#1f77b4", "#d62728", "#2ca02c", "#9467bd", "#ff7f0e"];
const SVG = "http://www.w3.org/2000/svg";

function el(name, attrs, parent) {
  const e = document.createElementNS(SVG, name);
  for (const [k, v] of Object.entries(attrs)) e.setAttribute(k, v);
  parent.appendChild(e);
  return e;
}

// series: [{ label, xs, ys }]
function plot(id, series, xLabel) {
  const svg = document.getElementById(id);
  svg.innerHTML = "";
  const { width, height } = svg.getBoundingClientRect();
  const pad = 45;
  const xs = series.flatMap((s) => s.xs);
  const ys = series.flatMap((s) => s.ys).filter(Number.isFinite);
  const [x0, x1] = [Math.min(...xs), Math.max(...xs)];
  const [y0, y1] = [Math.min(0, ...ys), Math.max(...ys)];
  const sx = (x) => pad + ((x - x0) / (x1 - x0 || 1)) * (width - 2 * pad);
  const sy = (y) => height - pad - ((y - y0) / (y1 - y0 || 1)) * (height - 2 * pad);
  el("line", { x1: pad, y1: height - pad, x2: width - pad, y2: height - pad, stroke: "#888" }, svg);
  el("line", { x1: pad, y1: pad, x2: pad, y2: height - pad, stroke: "#888" }, svg);
  for (const t of [0, 0.25, 0.5, 0.75, 1]) {
    const xv = x0 + t * (x1 - x0);
    const yv = y0 + t * (y1 - y0);
    el("text", { x: sx(xv), y: height - pad + 15, "text-anchor": "middle", "font-size": 11 }, svg).textContent = +xv.toPrecision(4);
    el("text", { x: pad - 5, y: sy(yv) + 4, "text-anchor": "end", "font-size": 11 }, svg).textContent = +yv.toPrecision(3);
  }
  el("text", { x: width / 2, y: height - 8, "text-anchor": "middle", "font-size": 12 }, svg).textContent = xLabel;
  series.forEach((s, i) => {
    const d = s.xs
      .map((x, k) => [x, s.ys[k]])
      .filter(([, y]) => Number.isFinite(y))
      .map(([x, y], k) => `${k ? "L" : "M"}${sx(x)},${sy(y)}`)
      .join("");
    el("path", { d, fill: "none", stroke: COLORS[i % COLORS.length], "stroke-width": 2 }, svg);
  });
  document.getElementById(`${id.split("-")[0]}-legend`).innerHTML = series
    .map((s, i) => `<span style="color:${COLORS[i % COLORS.length]}">&#9632; ${s.label}</span>`)
    .join("");
}

function values(form) {
  return Object.fromEntries([...new FormData(form)].map(([k, v]) => [k, Number(v)]));
}

function show(id, json, draw) {
  const r = JSON.parse(json);
  if (r.error) {
    document.getElementById(`${id.split("-")[0]}-legend`).innerHTML = `<span class="error">${r.error}</span>`;
    document.getElementById(id).innerHTML = "";
    return;
  }
  draw(r);
}

function bind(formId, handler) {
  const form = document.getElementById(formId);
  form.addEventListener("submit", (e) => {
    e.preventDefault();
    handler(values(form));
  });
  handler(values(form));
}

await init();

bind("pmf", (v) =>
  show("pmf-plot", pmfCurves(v.rho, v.x1, v.n0, v.n1, v.ns, v.jmax), (r) =>
    plot("pmf-plot", r.pmf.map((ys, j) => ({ label: `P(${j} starvations)`, xs: r.n, ys })), "file size N (packets)")
  )
);

bind("fluid", (v) =>
  show("fluid-plot", fluidCurves(v.rho, 1 / v.mean, v.nm, v.varrho, v.x0, v.x1, 1), (r) =>
    plot(
      "fluid-plot",
      [
        { label: "exponential", xs: r.x1, ys: r.exponential },
        { label: `Pareto (upsilon ${r.upsilon.toFixed(4)})`, xs: r.x1, ys: r.pareto },
        { label: `log-normal (sigma ${r.sigma.toFixed(4)})`, xs: r.x1, ys: r.lognormal },
      ],
      "threshold x1 (packets)"
    )
  )
);

bind("qoe", (v) =>
  show("qoe-plot", qoeCurve(v.mu, 1 / v.mean, v.gamma, v.l0, v.l1, v.ls), (r) =>
    plot(
      "qoe-plot",
      [
        { label: "x1* (packets)", xs: r.lambda, ys: r.x1_star },
        { label: "closed-form optimum", xs: r.lambda, ys: r.x1_real },
      ],
      "arrival rate lambda (packets/s)"
    )
  )
);
