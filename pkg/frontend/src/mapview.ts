// Top-down canvas renderer over the mesh sidecar with feature picking.
// Controller state (pan/zoom/highlight/picking) is DOM-free so tests can
// drive it headlessly; draw() is a no-op without a canvas context.

import { pickAtPoint } from "./engine.js";
import type { InterchangeDocument, MeshSidecar, Selection } from "./types.js";

const HIGHLIGHT = "rgba(255, 80, 40, 0.85)";
const OUTLINE = "rgba(20, 20, 20, 0.35)";

export class MapView {
  readonly width: number;
  readonly height: number;
  centerX: number;
  centerY: number;
  zoom: number; // pixels per scene meter
  highlighted: Selection = new Set();
  private ctx: CanvasRenderingContext2D | null = null;

  constructor(
    private readonly mesh: MeshSidecar,
    private readonly collection: InterchangeDocument,
    width = 640,
    height = 480,
  ) {
    this.width = width;
    this.height = height;
    this.centerX = mesh.origin[0];
    this.centerY = mesh.origin[1];
    this.zoom = 1;
    this.fit();
  }

  attach(canvas: HTMLCanvasElement): void {
    this.ctx = canvas.getContext("2d");
  }

  // initial view: mesh bounds plus a margin
  private fit(): void {
    const pos = this.mesh.positions;
    if (pos.length === 0) return;
    let minX = Infinity, minY = Infinity, maxX = -Infinity, maxY = -Infinity;
    for (let i = 0; i < pos.length; i += 3) {
      minX = Math.min(minX, pos[i]);
      maxX = Math.max(maxX, pos[i]);
      minY = Math.min(minY, pos[i + 1]);
      maxY = Math.max(maxY, pos[i + 1]);
    }
    this.centerX = this.mesh.origin[0] + (minX + maxX) / 2;
    this.centerY = this.mesh.origin[1] + (minY + maxY) / 2;
    const extentX = maxX - minX || 1;
    const extentY = maxY - minY || 1;
    this.zoom = 0.9 * Math.min(this.width / extentX, this.height / extentY);
  }

  screenToScene(sx: number, sy: number): [number, number] {
    return [
      this.centerX + (sx - this.width / 2) / this.zoom,
      this.centerY - (sy - this.height / 2) / this.zoom,
    ];
  }

  sceneToScreen(x: number, y: number): [number, number] {
    return [
      this.width / 2 + (x - this.centerX) * this.zoom,
      this.height / 2 - (y - this.centerY) * this.zoom,
    ];
  }

  pan(dxPixels: number, dyPixels: number): void {
    this.centerX -= dxPixels / this.zoom;
    this.centerY += dyPixels / this.zoom;
  }

  zoomBy(factor: number): void {
    this.zoom *= factor;
  }

  // click -> scene point -> engine picking over the source collection
  handleClick(sx: number, sy: number): Selection {
    const [x, y] = this.screenToScene(sx, sy);
    return pickAtPoint(this.collection, x, y, 5 / this.zoom);
  }

  setHighlight(selection: Selection): void {
    this.highlighted = selection;
    this.draw();
  }

  draw(): void {
    const ctx = this.ctx;
    if (!ctx) return;
    ctx.clearRect(0, 0, this.width, this.height);
    const { positions, indices, triangleFeature, colors, origin } = this.mesh;
    for (let t = 0; t < triangleFeature.length; t++) {
      const fid = triangleFeature[t];
      const rgba = colors[String(fid)] ?? [160, 160, 160, 255];
      const fill = this.highlighted.has(fid)
        ? HIGHLIGHT
        : `rgba(${rgba[0]}, ${rgba[1]}, ${rgba[2]}, ${rgba[3] / 255})`;
      ctx.beginPath();
      for (let k = 0; k < 3; k++) {
        const v = indices[3 * t + k];
        const [sx, sy] = this.sceneToScreen(
          origin[0] + positions[3 * v],
          origin[1] + positions[3 * v + 1],
        );
        if (k === 0) ctx.moveTo(sx, sy);
        else ctx.lineTo(sx, sy);
      }
      ctx.closePath();
      ctx.fillStyle = fill;
      ctx.fill();
      ctx.strokeStyle = OUTLINE;
      ctx.lineWidth = 0.5;
      ctx.stroke();
    }
  }
}
