// Browser bootstrap: load the fixture scene, attach canvases, wire mouse
// interaction (click-pick and drag-pan on the map, drag-brush on the
// scatter). Static files only; no server code.

import { loadScene, Scene } from "./app.js";

function banner(message: string): void {
  const el = document.getElementById("banner");
  if (el) {
    el.textContent = message;
    el.style.display = "block";
  }
}

function wireMap(scene: Scene, canvas: HTMLCanvasElement): void {
  let dragging = false;
  let moved = false;
  let last: [number, number] = [0, 0];
  canvas.addEventListener("mousedown", (e) => {
    dragging = true;
    moved = false;
    last = [e.offsetX, e.offsetY];
  });
  canvas.addEventListener("mousemove", (e) => {
    if (!dragging) return;
    const dx = e.offsetX - last[0];
    const dy = e.offsetY - last[1];
    if (Math.abs(dx) + Math.abs(dy) > 2) moved = true;
    scene.map.pan(dx, dy);
    last = [e.offsetX, e.offsetY];
    scene.map.draw();
  });
  canvas.addEventListener("mouseup", (e) => {
    dragging = false;
    if (!moved) scene.clickMap(e.offsetX, e.offsetY);
  });
  canvas.addEventListener("wheel", (e) => {
    e.preventDefault();
    scene.map.zoomBy(e.deltaY < 0 ? 1.15 : 1 / 1.15);
    scene.map.draw();
  });
}

function wireScatter(scene: Scene, canvas: HTMLCanvasElement): void {
  let start: [number, number] | null = null;
  canvas.addEventListener("mousedown", (e) => {
    start = [e.offsetX, e.offsetY];
  });
  canvas.addEventListener("mouseup", (e) => {
    if (!start) return;
    scene.brushScatter(start[0], start[1], e.offsetX, e.offsetY);
    start = null;
  });
}

async function boot(): Promise<void> {
  try {
    const scene = await loadScene(
      "fixtures/neighborhoods.mesh.json",
      "fixtures/neighborhoods.json",
      { xAttr: "sjoin.avg.capacity", yAttr: "sjoin.avg.ratio" },
    );
    const mapCanvas = document.getElementById("map") as HTMLCanvasElement;
    const scatterCanvas =
      document.getElementById("scatter") as HTMLCanvasElement;
    scene.map.attach(mapCanvas);
    scene.scatter.attach(scatterCanvas);
    scene.map.draw();
    scene.scatter.draw();
    wireMap(scene, mapCanvas);
    wireScatter(scene, scatterCanvas);
  } catch (err) {
    banner(`load error: ${err instanceof Error ? err.message : err}`);
  }
}

boot();
