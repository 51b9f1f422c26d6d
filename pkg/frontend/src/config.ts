/** API base resolution: URL query (?api=...), then localStorage, then a
 * window global injected at deploy time, then same-origin. */

const STORAGE_KEY = "clintriage.api";

export function resolveApiBase(win: Window = window): string {
  const params = new URLSearchParams(win.location.search);
  const fromQuery = params.get("api");
  if (fromQuery) {
    try {
      win.localStorage.setItem(STORAGE_KEY, fromQuery);
    } catch {
      // storage may be unavailable; the query value still wins this session
    }
    return stripSlash(fromQuery);
  }
  try {
    const stored = win.localStorage.getItem(STORAGE_KEY);
    if (stored) return stripSlash(stored);
  } catch {
    // fall through
  }
  const injected = (win as unknown as { CLINTRIAGE_API?: string }).CLINTRIAGE_API;
  if (injected) return stripSlash(injected);
  return "";
}

function stripSlash(base: string): string {
  return base.endsWith("/") ? base.slice(0, -1) : base;
}
