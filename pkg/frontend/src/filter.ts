/**
 * Type-to-filter for the correction drop-down: case-insensitive prefix match,
 * empty query keeps the full list.
 */
export function filterClasses(classNames: string[], query: string): string[] {
  const q = query.trim().toLowerCase();
  if (q === "") return classNames.slice();
  return classNames.filter((name) => name.toLowerCase().startsWith(q));
}
