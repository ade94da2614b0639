// In-page ports of the engine's interaction operations. These must agree
// with the engine for every unoccluded feature; the test suite checks them
// against engine-computed selections.

import type {
  InterchangeDocument,
  InterchangeFeature,
  Selection,
  ValueRect,
} from "./types.js";

export function getPath(props: Record<string, unknown>, path: string): unknown {
  let node: unknown = props;
  for (const part of path.split(".")) {
    if (typeof node !== "object" || node === null || !(part in node)) {
      return null;
    }
    node = (node as Record<string, unknown>)[part];
  }
  return node;
}

function pointOnSegment(
  x: number, y: number, a: number[], b: number[],
): boolean {
  const cross = (b[0] - a[0]) * (y - a[1]) - (b[1] - a[1]) * (x - a[0]);
  if (cross !== 0) return false;
  return (
    Math.min(a[0], b[0]) <= x && x <= Math.max(a[0], b[0]) &&
    Math.min(a[1], b[1]) <= y && y <= Math.max(a[1], b[1])
  );
}

function pointInRing(x: number, y: number, ring: number[][]): boolean {
  let inside = false;
  let j = ring.length - 1;
  for (let i = 0; i < ring.length; i++) {
    const [x1, y1] = ring[i];
    const [x2, y2] = ring[j];
    if ((y1 > y) !== (y2 > y)) {
      const t = ((x2 - x1) * (y - y1)) / (y2 - y1) + x1;
      if (x < t) inside = !inside;
    }
    j = i;
  }
  return inside;
}

// Even-odd containment; boundary points count as inside, holes do not.
export function pointInPolygon(
  x: number, y: number, polygons: number[][][][],
): boolean {
  let inside = false;
  for (const rings of polygons) {
    for (const ring of rings) {
      for (let i = 0; i < ring.length - 1; i++) {
        if (pointOnSegment(x, y, ring[i], ring[i + 1])) return true;
      }
      if (pointInRing(x, y, ring)) inside = !inside;
    }
  }
  return inside;
}

function asPolygons(feature: InterchangeFeature): number[][][][] {
  const geometry = feature.geometry;
  if (geometry.type === "Polygon") {
    return [geometry.coordinates as number[][][]];
  }
  if (geometry.type === "MultiPolygon") {
    return geometry.coordinates as number[][][][];
  }
  return [];
}

function segmentDistance(
  px: number, py: number, a: number[], b: number[],
): number {
  const dx = b[0] - a[0];
  const dy = b[1] - a[1];
  const n2 = dx * dx + dy * dy;
  let t = 0;
  if (n2 > 0) {
    t = Math.max(0, Math.min(1, ((px - a[0]) * dx + (py - a[1]) * dy) / n2));
  }
  return Math.hypot(px - a[0] - t * dx, py - a[1] - t * dy);
}

// Ids of all features under a scene point: containing polygons, point
// features within tolerance, polylines within tolerance.
export function pickAtPoint(
  collection: InterchangeDocument, x: number, y: number, tolerance = 0,
): Selection {
  const hit = new Set<number>();
  for (const f of collection.features) {
    const g = f.geometry;
    if (g.type === "Polygon" || g.type === "MultiPolygon") {
      if (pointInPolygon(x, y, asPolygons(f))) hit.add(f.id);
    } else if (g.type === "Point") {
      const p = g.coordinates as number[];
      if (Math.hypot(p[0] - x, p[1] - y) <= tolerance) hit.add(f.id);
    } else if (g.type === "MultiPoint") {
      const pts = g.coordinates as number[][];
      if (pts.some((p) => Math.hypot(p[0] - x, p[1] - y) <= tolerance)) {
        hit.add(f.id);
      }
    } else if (g.type === "LineString") {
      const pts = g.coordinates as number[][];
      for (let i = 0; i < pts.length - 1; i++) {
        if (segmentDistance(x, y, pts[i], pts[i + 1]) <= tolerance) {
          hit.add(f.id);
          break;
        }
      }
    }
  }
  return hit;
}

// Ids whose two attribute values are numbers inside the inclusive rect;
// features missing either attribute never match.
export function brushDataSpace(
  collection: InterchangeDocument, xAttr: string, yAttr: string,
  rect: ValueRect,
): Selection {
  const hit = new Set<number>();
  for (const f of collection.features) {
    const vx = getPath(f.properties, xAttr);
    const vy = getPath(f.properties, yAttr);
    if (typeof vx !== "number" || typeof vy !== "number") continue;
    if (rect.x0 <= vx && vx <= rect.x1 && rect.y0 <= vy && vy <= rect.y1) {
      hit.add(f.id);
    }
  }
  return hit;
}
