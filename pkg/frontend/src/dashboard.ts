import { Metrics, RatioStats } from "./api.js";

export interface CurvePoint {
  round: number;
  cost: number;
  accuracy: number;
}

export interface TierBar {
  tier: string;
  selected: number;
  accuracy: number | null;
}

/**
 * Dashboard view models. Every value comes from service endpoints; the UI
 * never recomputes cost or ratios locally, so the views cannot drift from the
 * server's accounting.
 */

export function costCurve(history: Metrics[]): CurvePoint[] {
  return history.map((m) => ({
    round: m.round,
    cost: m.cost_cumulative,
    accuracy: m.test_accuracy,
  }));
}

const TIER_ORDER = ["hard", "intermediate", "easy"];

export function tierBars(metrics: Metrics): TierBar[] {
  return TIER_ORDER.map((tier) => {
    const counts = metrics.tiers[tier] ?? { selected: 0, suggestion_correct: 0 };
    return {
      tier,
      selected: counts.selected,
      // null keeps zero-record tiers as placeholders instead of 0/0
      accuracy:
        counts.selected > 0 ? counts.suggestion_correct / counts.selected : null,
    };
  });
}

export interface RatiosView {
  placeholder: boolean;
  meanRatio: number | null;
  medianRatio: number | null;
  meanVerify: number | null;
  meanCorrect: number | null;
}

export function ratiosView(stats: RatioStats | null): RatiosView {
  if (stats === null) {
    return {
      placeholder: true,
      meanRatio: null,
      medianRatio: null,
      meanVerify: null,
      meanCorrect: null,
    };
  }
  return {
    placeholder: false,
    meanRatio: stats.mean_ratio,
    medianRatio: stats.median_ratio,
    meanVerify: stats.mean_cv,
    meanCorrect: stats.mean_ca,
  };
}
