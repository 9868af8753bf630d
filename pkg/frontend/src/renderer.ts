/** Top-down scene rendering onto a 2D canvas.
 *
 * Drawing goes through the minimal `DrawSurface` subset of
 * CanvasRenderingContext2D so tests can substitute a counting fake; the
 * return value reports exactly how many scene objects were drawn.
 */

import type { FrameJson, FurnitureJson, RoadJson } from "./types.js";

export interface DrawSurface {
  fillStyle: string | CanvasGradient | CanvasPattern;
  strokeStyle: string | CanvasGradient | CanvasPattern;
  lineWidth: number;
  fillRect(x: number, y: number, w: number, h: number): void;
  beginPath(): void;
  moveTo(x: number, y: number): void;
  lineTo(x: number, y: number): void;
  closePath(): void;
  fill(): void;
  stroke(): void;
  setLineDash(segments: number[]): void;
}

export interface Viewport {
  /** World x of the left canvas edge. */
  originX: number;
  /** Pixels per meter. */
  scale: number;
  widthPx: number;
  heightPx: number;
}

export interface RenderCounts {
  vehicles: number;
  furniture: number;
}

const COLORS: Record<string, string> = {
  ego: "#2563eb",
  default: "#dc2626",
  building: "#9ca3af",
  tree: "#16a34a",
  barrier: "#6b7280",
};

function toPx(v: Viewport, x: number, y: number): [number, number] {
  // world y up, canvas y down; the road centerline sits mid-canvas
  return [(x - v.originX) * v.scale, v.heightPx / 2 - y * v.scale];
}

function fillPolygon(
  ctx: DrawSurface,
  v: Viewport,
  points: [number, number][],
  color: string,
): void {
  ctx.fillStyle = color;
  ctx.beginPath();
  points.forEach(([x, y], k) => {
    const [px, py] = toPx(v, x, y);
    if (k === 0) {
      ctx.moveTo(px, py);
    } else {
      ctx.lineTo(px, py);
    }
  });
  ctx.closePath();
  ctx.fill();
}

function vehiclePolygon(veh: {
  x: number;
  y: number;
  heading: number;
  length: number;
  width: number;
}): [number, number][] {
  const c = Math.cos(veh.heading);
  const s = Math.sin(veh.heading);
  const l = veh.length / 2;
  const w = veh.width / 2;
  const corners: [number, number][] = [
    [l, w],
    [l, -w],
    [-l, -w],
    [-l, w],
  ];
  return corners.map(([dx, dy]) => [
    veh.x + dx * c - dy * s,
    veh.y + dx * s + dy * c,
  ]);
}

function drawRoad(ctx: DrawSurface, v: Viewport, road: RoadJson): void {
  ctx.fillStyle = "#e5e7eb"; // off-road
  ctx.fillRect(0, 0, v.widthPx, v.heightPx);
  const [, topPx] = toPx(v, 0, road.y_max);
  const [, botPx] = toPx(v, 0, road.y_min);
  ctx.fillStyle = "#374151"; // asphalt
  ctx.fillRect(0, topPx, v.widthPx, botPx - topPx);
  ctx.strokeStyle = "#f9fafb";
  ctx.lineWidth = 2;
  for (let lane = 0; lane <= road.lane_count; lane++) {
    const y =
      road.y_min + lane * road.lane_width;
    const edge = lane === 0 || lane === road.lane_count;
    ctx.setLineDash(edge ? [] : [12, 12]);
    const [, py] = toPx(v, 0, y);
    ctx.beginPath();
    ctx.moveTo(0, py);
    ctx.lineTo(v.widthPx, py);
    ctx.stroke();
  }
  ctx.setLineDash([]);
}

/**
 * Draw one frame; the vehicle and furniture lists are rendered exactly as
 * the API returned them — population filtering happens server-side.
 */
export function renderScene(
  ctx: DrawSurface,
  viewport: Viewport,
  road: RoadJson,
  frame: FrameJson,
  furniture: FurnitureJson[],
): RenderCounts {
  drawRoad(ctx, viewport, road);
  for (const obj of furniture) {
    fillPolygon(ctx, viewport, obj.polygon, COLORS[obj.class] ?? COLORS.default!);
  }
  for (const veh of frame.vehicles) {
    const color = veh.id === "ego" ? COLORS.ego! : COLORS.default!;
    fillPolygon(ctx, viewport, vehiclePolygon(veh), color);
  }
  return { vehicles: frame.vehicles.length, furniture: furniture.length };
}

/** Viewport that keeps the ego vehicle a third of the way into the canvas. */
export function followEgo(
  frame: FrameJson,
  widthPx: number,
  heightPx: number,
  scale = 8,
): Viewport {
  const ego = frame.vehicles.find((v) => v.id === "ego");
  const x = ego ? ego.x : 0;
  return { originX: x - widthPx / (3 * scale), scale, widthPx, heightPx };
}
