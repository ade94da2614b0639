// Scatter plot over two attribute paths with rectangular brushing.
// A degenerate (zero-area) drag is treated as a click on the nearest
// point within tolerance. Controller logic is DOM-free.

import { brushDataSpace, getPath } from "./engine.js";
import type { InterchangeDocument, Selection, ValueRect } from "./types.js";

const MARGIN = 36;
const CLICK_TOLERANCE_PX = 10;

interface Dot {
  id: number;
  vx: number;
  vy: number;
}

export class ScatterView {
  readonly width: number;
  readonly height: number;
  highlighted: Selection = new Set();
  private readonly dots: Dot[] = [];
  private xMin = 0;
  private xMax = 1;
  private yMin = 0;
  private yMax = 1;
  private ctx: CanvasRenderingContext2D | null = null;

  constructor(
    private readonly collection: InterchangeDocument,
    readonly xAttr: string,
    readonly yAttr: string,
    width = 420,
    height = 420,
  ) {
    this.width = width;
    this.height = height;
    for (const f of collection.features) {
      const vx = getPath(f.properties, xAttr);
      const vy = getPath(f.properties, yAttr);
      if (typeof vx !== "number" || typeof vy !== "number") continue;
      this.dots.push({ id: f.id, vx, vy });
    }
    if (this.dots.length > 0) {
      this.xMin = Math.min(...this.dots.map((d) => d.vx));
      this.xMax = Math.max(...this.dots.map((d) => d.vx));
      this.yMin = Math.min(...this.dots.map((d) => d.vy));
      this.yMax = Math.max(...this.dots.map((d) => d.vy));
      if (this.xMin === this.xMax) this.xMax += 1;
      if (this.yMin === this.yMax) this.yMax += 1;
    }
  }

  attach(canvas: HTMLCanvasElement): void {
    this.ctx = canvas.getContext("2d");
  }

  valueToPixel(vx: number, vy: number): [number, number] {
    const px = MARGIN +
      ((vx - this.xMin) / (this.xMax - this.xMin)) * (this.width - 2 * MARGIN);
    const py = this.height - MARGIN -
      ((vy - this.yMin) / (this.yMax - this.yMin)) * (this.height - 2 * MARGIN);
    return [px, py];
  }

  pixelToValue(px: number, py: number): [number, number] {
    const vx = this.xMin +
      ((px - MARGIN) / (this.width - 2 * MARGIN)) * (this.xMax - this.xMin);
    const vy = this.yMin +
      ((this.height - MARGIN - py) / (this.height - 2 * MARGIN)) *
      (this.yMax - this.yMin);
    return [vx, vy];
  }

  // pixel-space drag rectangle -> value-space selection
  handleBrush(px0: number, py0: number, px1: number, py1: number): Selection {
    if (Math.abs(px1 - px0) < 2 && Math.abs(py1 - py0) < 2) {
      return this.handleClick((px0 + px1) / 2, (py0 + py1) / 2);
    }
    const [ax, ay] = this.pixelToValue(px0, py0);
    const [bx, by] = this.pixelToValue(px1, py1);
    const rect: ValueRect = {
      x0: Math.min(ax, bx),
      x1: Math.max(ax, bx),
      y0: Math.min(ay, by),
      y1: Math.max(ay, by),
    };
    return this.brushValues(rect);
  }

  brushValues(rect: ValueRect): Selection {
    return brushDataSpace(this.collection, this.xAttr, this.yAttr, rect);
  }

  handleClick(px: number, py: number): Selection {
    let best: Dot | null = null;
    let bestDistance = CLICK_TOLERANCE_PX;
    for (const dot of this.dots) {
      const [dx, dy] = this.valueToPixel(dot.vx, dot.vy);
      const distance = Math.hypot(dx - px, dy - py);
      if (distance <= bestDistance) {
        best = dot;
        bestDistance = distance;
      }
    }
    return best ? new Set([best.id]) : new Set();
  }

  setHighlight(selection: Selection): void {
    this.highlighted = selection;
    this.draw();
  }

  draw(): void {
    const ctx = this.ctx;
    if (!ctx) return;
    ctx.clearRect(0, 0, this.width, this.height);
    ctx.strokeStyle = "#888";
    ctx.strokeRect(MARGIN, MARGIN, this.width - 2 * MARGIN,
      this.height - 2 * MARGIN);
    const dim = this.highlighted.size > 0;
    for (const dot of this.dots) {
      const [px, py] = this.valueToPixel(dot.vx, dot.vy);
      const selected = this.highlighted.has(dot.id);
      ctx.beginPath();
      ctx.arc(px, py, selected ? 6 : 4, 0, 2 * Math.PI);
      ctx.fillStyle = selected
        ? "rgba(255, 80, 40, 0.9)"
        : dim ? "rgba(90, 110, 140, 0.25)" : "rgba(90, 110, 140, 0.85)";
      ctx.fill();
    }
  }
}
