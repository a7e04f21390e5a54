const BLOCKS = ["▁", "▂", "▃", "▄", "▅", "▆", "▇", "█"];

/**
 * Render a feature vector as a unicode sparkline, used when an item has no
 * thumbnail. Values are scaled to the vector's own min/max; a constant vector
 * renders as a flat mid-height line.
 */
export function featureSparkline(features: number[]): string {
  if (features.length === 0) return "";
  const lo = Math.min(...features);
  const hi = Math.max(...features);
  if (hi === lo) return BLOCKS[3]!.repeat(features.length);
  return features
    .map((v) => {
      const level = Math.min(
        BLOCKS.length - 1,
        Math.floor(((v - lo) / (hi - lo)) * BLOCKS.length),
      );
      return BLOCKS[level];
    })
    .join("");
}
