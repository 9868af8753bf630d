/** DOM wiring for the rating apparatus: playback canvas, live slider,
 * timer, live indicator, and upload of the recorded trace. */

import {
  ApiClient,
  clearDraft,
  loadDraft,
  saveDraft,
  uploadWithRetry,
} from "./api.js";
import { followEgo, renderScene } from "./renderer.js";
import { NEUTRAL_SRR, PlaybackSession, SLIDER_STEP } from "./session.js";
import type { FramesResponse, Population } from "./types.js";

const api = new ApiClient();

function el<T extends HTMLElement>(id: string): T {
  const node = document.getElementById(id);
  if (!node) {
    throw new Error(`missing element #${id}`);
  }
  return node as T;
}

const raterInput = el<HTMLInputElement>("rater-id");
const scenarioSelect = el<HTMLSelectElement>("scenario");
const populationSelect = el<HTMLSelectElement>("population");
const startButton = el<HTMLButtonElement>("start");
const canvas = el<HTMLCanvasElement>("scene");
const slider = el<HTMLInputElement>("srr");
const sliderValue = el<HTMLSpanElement>("srr-value");
const timer = el<HTMLSpanElement>("timer");
const liveDot = el<HTMLSpanElement>("live");
const status = el<HTMLParagraphElement>("status");

slider.min = "0";
slider.max = "10";
slider.step = String(SLIDER_STEP);
slider.value = String(NEUTRAL_SRR);

function showSliderValue(): void {
  sliderValue.textContent = Number(slider.value).toFixed(1);
}
slider.addEventListener("input", showSliderValue);
showSliderValue();

async function populateScenarios(): Promise<void> {
  const scenarios = await api.listScenarios();
  scenarioSelect.replaceChildren(
    ...scenarios.map((s) => {
      const opt = document.createElement("option");
      opt.value = s.id;
      opt.textContent = `${s.id} (${s.duration.toFixed(1)} s)`;
      return opt;
    }),
  );
}

async function retryPendingDraft(): Promise<void> {
  const draft = loadDraft(localStorage);
  if (!draft) {
    return;
  }
  status.textContent = "retrying unsent rating from a previous session…";
  try {
    await uploadWithRetry(api, draft.sessionId, draft.samples);
    clearDraft(localStorage);
    status.textContent = "previous rating uploaded.";
  } catch {
    status.textContent = "previous rating still unsent; will retry on reload.";
  }
}

function setLive(on: boolean): void {
  liveDot.classList.toggle("live-on", on);
  liveDot.textContent = on ? "LIVE" : "idle";
  startButton.disabled = on;
  scenarioSelect.disabled = on;
  populationSelect.disabled = on;
  raterInput.disabled = on;
}

async function runSession(): Promise<void> {
  const raterId = raterInput.value.trim();
  if (!raterId) {
    status.textContent = "enter a rater id first.";
    return;
  }
  const scenarioId = scenarioSelect.value;
  const population = populationSelect.value as Population;
  let frames: FramesResponse;
  let sessionId: string;
  try {
    frames = await api.getFrames(scenarioId, population);
    sessionId = await api.createSession(raterId, scenarioId, population);
  } catch (err) {
    status.textContent = `cannot start session: ${String(err)}`;
    return;
  }

  const ctx = canvas.getContext("2d");
  if (!ctx) {
    status.textContent = "canvas unavailable in this browser.";
    return;
  }
  slider.value = String(NEUTRAL_SRR);
  showSliderValue();

  const session = new PlaybackSession(
    scenarioId,
    population,
    frames.dt,
    frames.frames.length,
    () => Number(slider.value),
    {
      onFrame: (index) => {
        const frame = frames.frames[index];
        if (frame) {
          const view = followEgo(frame, canvas.width, canvas.height);
          renderScene(ctx, view, frames.road, frame, frames.furniture);
        }
      },
      onStall: () => {
        status.textContent =
          "playback stalled for more than 1 s — session invalid, not uploaded.";
      },
      onEnd: async (samples) => {
        setLive(false);
        if (session.invalid) {
          return;
        }
        saveDraft(localStorage, { sessionId, samples });
        try {
          const result = await uploadWithRetry(api, sessionId, samples);
          clearDraft(localStorage);
          status.textContent = `rating stored (${result.stored_samples} samples). Thank you!`;
        } catch (err) {
          status.textContent =
            `upload failed (${String(err)}); the trace is saved locally ` +
            "and will be retried on reload.";
        }
      },
    },
  );

  setLive(true);
  status.textContent =
    "rate continuously: 0 = non-existent risk, 5 = neutral, 10 = unacceptable.";
  session.start(performance.now());
  const loop = (now: number): void => {
    session.advanceTo(now);
    timer.textContent = `${session.state.currentT.toFixed(1)} s`;
    if (session.state.playing) {
      requestAnimationFrame(loop);
    }
  };
  requestAnimationFrame(loop);
}

startButton.addEventListener("click", () => {
  void runSession();
});

void populateScenarios().then(retryPendingDraft);
