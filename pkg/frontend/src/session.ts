/** Playback session: real-time frame advance plus fixed-rate slider sampling.
 *
 * The session is driven by `advanceTo(nowMs)` calls from an external loop
 * (requestAnimationFrame in the app, synthetic timestamps in tests), which
 * keeps all timing logic deterministic and scriptable. While the session is
 * live, the slider is sampled at SAMPLE_RATE_HZ with previous-value hold;
 * there is no pause — one continuous pass per session.
 */

import type { RatingSample } from "./types.js";

export const SAMPLE_RATE_HZ = 10;
export const SLIDER_STEP = 0.1;
export const NEUTRAL_SRR = 5;
export const STALL_LIMIT_MS = 1000;

/** Snap a slider value onto the 0.1 step grid and clamp into [0, 10]. */
export function quantizeSrr(value: number): number {
  const snapped = Math.round(value / SLIDER_STEP) * SLIDER_STEP;
  return Math.min(10, Math.max(0, Math.round(snapped * 10) / 10));
}

export interface PlaybackState {
  scenarioId: string;
  population: string;
  currentT: number;
  playing: boolean;
  samples: RatingSample[];
}

export interface SessionEvents {
  /** Called whenever the frame to display changes. */
  onFrame?(index: number, t: number): void;
  /** Called once when the scenario ends (all frames shown). */
  onEnd?(samples: RatingSample[]): void;
  /** Called if the driving loop stalls for more than STALL_LIMIT_MS. */
  onStall?(gapMs: number): void;
}

export class PlaybackSession {
  readonly state: PlaybackState;
  invalid = false;

  private readonly dt: number;
  private readonly nFrames: number;
  private readonly readSlider: () => number;
  private readonly events: SessionEvents;
  private startMs = 0;
  private lastMs = 0;
  private frameIndex = -1;
  private nextSampleT = 0;

  constructor(
    scenarioId: string,
    population: string,
    dt: number,
    nFrames: number,
    readSlider: () => number,
    events: SessionEvents = {},
  ) {
    this.dt = dt;
    this.nFrames = nFrames;
    this.readSlider = readSlider;
    this.events = events;
    this.state = {
      scenarioId,
      population,
      currentT: 0,
      playing: false,
      samples: [],
    };
  }

  get durationS(): number {
    return this.nFrames * this.dt;
  }

  start(nowMs: number): void {
    this.startMs = nowMs;
    this.lastMs = nowMs;
    this.state.playing = true;
    this.nextSampleT = 0;
    this.advanceTo(nowMs);
  }

  /** Advance session time; emits frames and records slider samples. */
  advanceTo(nowMs: number): void {
    if (!this.state.playing) {
      return;
    }
    if (nowMs - this.lastMs > STALL_LIMIT_MS) {
      this.invalid = true;
      this.events.onStall?.(nowMs - this.lastMs);
    }
    this.lastMs = nowMs;
    const t = (nowMs - this.startMs) / 1000;
    this.state.currentT = Math.min(t, this.durationS);

    // record every 1/SAMPLE_RATE_HZ seconds of session time; catching up
    // after a slow frame repeats the held value, never skips the grid
    const step = 1 / SAMPLE_RATE_HZ;
    while (this.nextSampleT <= t && this.nextSampleT < this.durationS - step / 2) {
      this.state.samples.push({
        t: Math.round(this.nextSampleT * 10) / 10,
        srr: quantizeSrr(this.readSlider()),
      });
      this.nextSampleT += step;
    }

    const frame = Math.min(Math.floor(t / this.dt), this.nFrames - 1);
    if (frame !== this.frameIndex) {
      this.frameIndex = frame;
      this.events.onFrame?.(frame, frame * this.dt);
    }
    if (t >= this.durationS) {
      this.state.playing = false;
      this.events.onEnd?.(this.state.samples);
    }
  }
}
