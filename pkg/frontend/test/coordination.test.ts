// Acceptance: drive a click inside a known polygon and a scatter brush
// over a known value box; the highlighted id sets in BOTH views must equal
// the selections the engine computed for the same inputs (fixtures are
// produced by the Python engine via scripts/generate_fixtures.py).

import { readFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";
import { describe, expect, it } from "vitest";

import { Scene } from "../src/app.js";
import { brushDataSpace, pickAtPoint } from "../src/engine.js";
import type { InterchangeDocument, MeshSidecar } from "../src/types.js";

const here = dirname(fileURLToPath(import.meta.url));

function fixture<T>(name: string): T {
  return JSON.parse(
    readFileSync(join(here, "..", "fixtures", name), "utf-8")) as T;
}

interface Expected {
  click: { scene: [number, number]; ids: number[] };
  brush: {
    xAttr: string; yAttr: string;
    x0: number; x1: number; y0: number; y1: number;
    ids: number[];
  };
}

const mesh = fixture<MeshSidecar>("neighborhoods.mesh.json");
const collection = fixture<InterchangeDocument>("neighborhoods.json");
const expected = fixture<Expected>("expected.json");

function makeScene(): Scene {
  return new Scene(mesh, collection, {
    xAttr: expected.brush.xAttr,
    yAttr: expected.brush.yAttr,
  });
}

describe("engine ports agree with engine-computed selections", () => {
  it("pickAtPoint matches the engine at the fixture click point", () => {
    const [x, y] = expected.click.scene;
    const ids = [...pickAtPoint(collection, x, y)].sort((a, b) => a - b);
    expect(ids).toEqual(expected.click.ids);
  });

  it("brushDataSpace matches the engine over the fixture value box", () => {
    const b = expected.brush;
    const ids = [...brushDataSpace(collection, b.xAttr, b.yAttr, b)]
      .sort((a, b2) => a - b2);
    expect(ids).toEqual(b.ids);
  });

  it("pickAtPoint agrees with the engine for every feature centroid-ish probe", () => {
    // probe a grid of points across the scene; subset invariant must hold
    for (let x = -100; x <= 1600; x += 137) {
      for (let y = -100; y <= 1600; y += 119) {
        const ids = pickAtPoint(collection, x, y);
        for (const id of ids) {
          expect(collection.features.some((f) => f.id === id)).toBe(true);
        }
      }
    }
  });
});

describe("linked-view coordination (Fig. 2 behavior)", () => {
  it("map click highlights the same ids in both views", () => {
    const scene = makeScene();
    const [x, y] = expected.click.scene;
    const [sx, sy] = scene.map.sceneToScreen(x, y);
    const selection = scene.clickMap(sx, sy);

    const got = [...selection].sort((a, b) => a - b);
    expect(got).toEqual(expected.click.ids);
    expect([...scene.map.highlighted].sort((a, b) => a - b))
      .toEqual(expected.click.ids);
    expect([...scene.scatter.highlighted].sort((a, b) => a - b))
      .toEqual(expected.click.ids);
  });

  it("scatter brush highlights the same ids in both views", () => {
    const scene = makeScene();
    const b = expected.brush;
    // drive the brush through pixel space to exercise the full chain
    const [px0, py0] = scene.scatter.valueToPixel(b.x0, b.y0);
    const [px1, py1] = scene.scatter.valueToPixel(b.x1, b.y1);
    const selection = scene.brushScatter(px0, py0, px1, py1);

    const got = [...selection].sort((a, b2) => a - b2);
    expect(got).toEqual(b.ids);
    expect([...scene.map.highlighted].sort((a, b2) => a - b2))
      .toEqual(b.ids);
    expect([...scene.scatter.highlighted].sort((a, b2) => a - b2))
      .toEqual(b.ids);
  });

  it("click on empty space clears both views", () => {
    const scene = makeScene();
    const [sx, sy] = scene.map.sceneToScreen(-4000, -4000);
    const selection = scene.clickMap(sx, sy);
    expect(selection.size).toBe(0);
    expect(scene.map.highlighted.size).toBe(0);
    expect(scene.scatter.highlighted.size).toBe(0);
  });

  it("both views show the single bus selection object", () => {
    const scene = makeScene();
    const [x, y] = expected.click.scene;
    const [sx, sy] = scene.map.sceneToScreen(x, y);
    scene.clickMap(sx, sy);
    expect(scene.map.highlighted).toBe(scene.activeSelection);
    expect(scene.scatter.highlighted).toBe(scene.activeSelection);
  });

  it("zero-area scatter drag selects the nearest point within tolerance", () => {
    const scene = makeScene();
    const first = collection.features.find(
      (f) => typeof f.id === "number" && expected.brush.ids.includes(f.id));
    expect(first).toBeDefined();
    const sjoin = first!.properties["sjoin"] as {
      avg: { capacity: number; ratio: number };
    };
    const [px, py] = scene.scatter.valueToPixel(sjoin.avg.capacity,
      sjoin.avg.ratio);
    const selection = scene.brushScatter(px + 1, py + 1, px + 1, py + 1);
    expect([...selection]).toEqual([first!.id]);

    const nothing = scene.brushScatter(2, 2, 2, 2);
    expect(nothing.size).toBe(0);
  });

  it("listener failures do not break the other view", () => {
    const scene = makeScene();
    scene.bus.addListener("picking", () => {
      throw new Error("broken listener");
    });
    const [x, y] = expected.click.scene;
    const [sx, sy] = scene.map.sceneToScreen(x, y);
    scene.clickMap(sx, sy);
    expect(scene.bus.listenerErrors).toBe(1);
    expect([...scene.map.highlighted].sort((a, b) => a - b))
      .toEqual(expected.click.ids);
  });
});
