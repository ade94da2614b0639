// Scene wiring: one bus, one selection, both views. Any interaction
// resolves to a Selection, goes through the bus once, and both views
// highlight exactly that set (no view-local filtering).

import { SelectionBus } from "./bus.js";
import { MapView } from "./mapview.js";
import { ScatterView } from "./scatter.js";
import type { InterchangeDocument, MeshSidecar, Selection } from "./types.js";

export interface SceneOptions {
  xAttr: string;
  yAttr: string;
  mapSize?: [number, number];
  scatterSize?: [number, number];
}

export class Scene {
  readonly bus = new SelectionBus();
  readonly map: MapView;
  readonly scatter: ScatterView;
  activeSelection: Selection = new Set();

  constructor(
    mesh: MeshSidecar,
    collection: InterchangeDocument,
    options: SceneOptions,
  ) {
    const [mw, mh] = options.mapSize ?? [640, 480];
    const [sw, sh] = options.scatterSize ?? [420, 420];
    this.map = new MapView(mesh, collection, mw, mh);
    this.scatter = new ScatterView(collection, options.xAttr, options.yAttr,
      sw, sh);
    const applyBoth = (selection: Selection) => {
      this.activeSelection = selection;
      this.map.setHighlight(selection);
      this.scatter.setHighlight(selection);
    };
    this.bus.addListener("picking", applyBoth);
    this.bus.addListener("brush", applyBoth);
  }

  clickMap(sx: number, sy: number): Selection {
    const selection = this.map.handleClick(sx, sy);
    this.bus.emit("picking", selection);
    return selection;
  }

  brushScatter(px0: number, py0: number, px1: number, py1: number): Selection {
    const selection = this.scatter.handleBrush(px0, py0, px1, py1);
    this.bus.emit("brush", selection);
    return selection;
  }
}

function assertSidecar(doc: unknown): MeshSidecar {
  const sidecar = doc as MeshSidecar;
  if (sidecar.format !== "FKMESH01" || !Array.isArray(sidecar.positions)) {
    throw new Error("not an FKMESH01 sidecar");
  }
  return sidecar;
}

function assertCollection(doc: unknown): InterchangeDocument {
  const collection = doc as InterchangeDocument;
  if (collection.type !== "FeatureCollection") {
    throw new Error("not an interchange FeatureCollection");
  }
  return collection;
}

export async function loadScene(
  meshUrl: string,
  collectionUrl: string,
  options: SceneOptions,
): Promise<Scene> {
  const [meshResponse, collectionResponse] = await Promise.all([
    fetch(meshUrl),
    fetch(collectionUrl),
  ]);
  if (!meshResponse.ok) {
    throw new Error(`failed to load ${meshUrl}: ${meshResponse.status}`);
  }
  if (!collectionResponse.ok) {
    throw new Error(
      `failed to load ${collectionUrl}: ${collectionResponse.status}`);
  }
  const mesh = assertSidecar(await meshResponse.json());
  const collection = assertCollection(await collectionResponse.json());
  return new Scene(mesh, collection, options);
}
