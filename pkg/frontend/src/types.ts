// Shapes of the files the engine exports: the canonical interchange
// document and the FKMESH01 JSON sidecar.

export type Position = number[];

export interface InterchangeGeometry {
  type: string;
  coordinates: unknown;
}

export interface InterchangeFeature {
  type: "Feature";
  id: number;
  geometry: InterchangeGeometry;
  properties: Record<string, unknown>;
}

export interface InterchangeDocument {
  type: "FeatureCollection";
  name: string;
  "crs-tag": string;
  features: InterchangeFeature[];
}

export interface MeshSidecar {
  format: string;
  layer: string;
  origin: [number, number];
  positions: number[];        // x,y,z per vertex, scene units
  indices: number[];          // vertex triples
  triangleFeature: number[];  // feature id per triangle
  colors: Record<string, number[]>;
}

export type Selection = Set<number>;

export interface ValueRect {
  x0: number;
  x1: number;
  y0: number;
  y1: number;
}
