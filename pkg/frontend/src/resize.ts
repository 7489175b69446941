/** Client-side downscaling so camera frames stay small on the wire. */

/** Longest edge we send to the gateway; phone cameras exceed this a lot. */
export const MAX_EDGE = 1920;

export interface TargetSize {
  width: number;
  height: number;
}

/**
 * Fit (width, height) inside a maxEdge square, preserving aspect ratio.
 * Images already within bounds keep their exact size — never upscale.
 */
export function computeTargetSize(
  width: number,
  height: number,
  maxEdge: number = MAX_EDGE,
): TargetSize {
  if (width <= 0 || height <= 0) throw new Error("image dimensions must be positive");
  const longEdge = Math.max(width, height);
  if (longEdge <= maxEdge) return { width, height };
  const scale = maxEdge / longEdge;
  return {
    width: Math.max(1, Math.round(width * scale)),
    height: Math.max(1, Math.round(height * scale)),
  };
}

/**
 * Downscale an image file for upload. Falls back to the original bytes
 * when the environment lacks canvas support or the image fails to decode.
 */
export async function downscaleImage(
  file: Blob,
  maxEdge: number = MAX_EDGE,
): Promise<{ blob: Blob; contentType: string }> {
  const original = { blob: file, contentType: file.type || "application/octet-stream" };
  if (typeof createImageBitmap !== "function" || typeof document === "undefined") {
    return original;
  }
  let bitmap: ImageBitmap;
  try {
    bitmap = await createImageBitmap(file);
  } catch {
    return original;
  }
  try {
    const target = computeTargetSize(bitmap.width, bitmap.height, maxEdge);
    if (target.width === bitmap.width && target.height === bitmap.height) {
      return original;
    }
    const canvas = document.createElement("canvas");
    canvas.width = target.width;
    canvas.height = target.height;
    const ctx = canvas.getContext("2d");
    if (!ctx) return original;
    ctx.drawImage(bitmap, 0, 0, target.width, target.height);
    const blob = await new Promise<Blob | null>((resolve) =>
      canvas.toBlob(resolve, "image/jpeg", 0.9),
    );
    if (!blob) return original;
    return { blob, contentType: "image/jpeg" };
  } finally {
    bitmap.close();
  }
}
