/** JSON shapes of the rating service API. */

export type Population = "O" | "A" | "A+R";

export interface ScenarioSummary {
  id: string;
  risk_label: string;
  dt: number;
  n_frames: number;
  duration: number;
  populations: Population[];
}

export interface VehicleJson {
  id: string;
  x: number;
  y: number;
  heading: number;
  length: number;
  width: number;
}

export interface RoadJson {
  lane_count: number;
  lane_width: number;
  ego_lane_index: number;
  road_length: number;
  y_min: number;
  y_max: number;
}

export interface FrameJson {
  t: number;
  vehicles: VehicleJson[];
}

export interface FurnitureJson {
  class: string;
  polygon: [number, number][];
}

export interface FramesResponse {
  id: string;
  dt: number;
  population: Population;
  road: RoadJson;
  frames: FrameJson[];
  furniture: FurnitureJson[];
}

export interface RatingSample {
  t: number;
  srr: number;
}

export interface ApiErrorBody {
  code: string;
  message: string;
}
