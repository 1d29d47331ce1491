import init, { held_karp_points, kecss, min_cut } from "./pkg/cutcover_web.js";

const $ = (id) => document.getElementById(id);
const num = (id) => Number($(id).value);

function draw(res) {
  const c = $("hk-canvas");
  const ctx = c.getContext("2d");
  const s = c.width / 1000;
  ctx.clearRect(0, 0, c.width, c.height);
  for (const [u, v, y] of res.edges) {
    const [a, b] = [res.points[u], res.points[v]];
    ctx.strokeStyle = `rgba(30, 90, 200, ${Math.min(1, y)})`;
    ctx.lineWidth = 1 + 2 * Math.min(1, y);
    ctx.beginPath();
    ctx.moveTo(a[0] * s, a[1] * s);
    ctx.lineTo(b[0] * s, b[1] * s);
    ctx.stroke();
  }
  ctx.fillStyle = "#c33";
  for (const [x, y] of res.points) {
    ctx.beginPath();
    ctx.arc(x * s, y * s, 3, 0, 2 * Math.PI);
    ctx.fill();
  }
}

function run(out, f) {
  const t = performance.now();
  try {
    const res = JSON.parse(f());
    return [res, `${(performance.now() - t).toFixed(0)} ms`];
  } catch (e) {
    $(out).textContent = `error: ${e}`;
    return [null, ""];
  }
}

await init();

$("hk-run").onclick = () => {
  const [res, ms] = run("hk-out", () => held_karp_points(num("hk-n"), num("hk-eps"), num("hk-seed")));
  if (!res) return;
  $("hk-out").textContent =
    `bound ${res.bound.toFixed(2)} (packing lower bound ${res.lower_bound.toFixed(2)}), ` +
    `${res.epochs} epochs, ${res.iterations} iterations, ${ms}`;
  draw(res);
};

$("g-kecss").onclick = () => {
  const [res, ms] = run("g-out", () => kecss($("g-text").value, num("g-k"), num("g-eps"), 1));
  if (res) $("g-out").textContent = `${ms}\n` + JSON.stringify(res, null, 1);
};

$("g-mincut").onclick = () => {
  const [res] = run("g-out", () => min_cut($("g-text").value));
  if (res) $("g-out").textContent = JSON.stringify(res);
};
