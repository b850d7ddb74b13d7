/** Binary NetPBM (P5 gray, P6 color, maxval 255) to RGBA, for snapshots. */

export interface DecodedImage {
  width: number;
  height: number;
  rgba: Uint8ClampedArray;
}

function nextToken(bytes: Uint8Array, pos: number): [string, number] {
  while (pos < bytes.length) {
    const c = bytes[pos];
    if (c === 0x23) { // '#' comment runs to end of line
      while (pos < bytes.length && bytes[pos] !== 0x0a) pos++;
    } else if (c === 0x20 || c === 0x09 || c === 0x0a || c === 0x0d) {
      pos++;
    } else {
      break;
    }
  }
  let start = pos;
  while (pos < bytes.length && !isSpace(bytes[pos])) pos++;
  if (start === pos) throw new Error(`truncated header at byte ${pos}`);
  let token = "";
  for (let i = start; i < pos; i++) token += String.fromCharCode(bytes[i]);
  return [token, pos];
}

const isSpace = (c: number) =>
  c === 0x20 || c === 0x09 || c === 0x0a || c === 0x0d;

export function decodeNetpbm(bytes: Uint8Array): DecodedImage {
  let [magic, pos] = nextToken(bytes, 0);
  if (magic !== "P5" && magic !== "P6") {
    throw new Error(`unsupported magic ${JSON.stringify(magic)}`);
  }
  const channels = magic === "P6" ? 3 : 1;
  let widthTok, heightTok, maxvalTok;
  [widthTok, pos] = nextToken(bytes, pos);
  [heightTok, pos] = nextToken(bytes, pos);
  [maxvalTok, pos] = nextToken(bytes, pos);
  const width = parseInt(widthTok, 10);
  const height = parseInt(heightTok, 10);
  if (!(width > 0) || !(height > 0)) {
    throw new Error(`bad dimensions ${widthTok}x${heightTok}`);
  }
  if (maxvalTok !== "255") throw new Error(`unsupported maxval ${maxvalTok}`);
  pos++; // single whitespace byte separates header from raster

  const need = width * height * channels;
  if (bytes.length - pos < need) {
    throw new Error(`raster truncated at byte ${bytes.length}, need ${pos + need}`);
  }
  const rgba = new Uint8ClampedArray(width * height * 4);
  for (let i = 0; i < width * height; i++) {
    const src = pos + i * channels;
    rgba[i * 4] = bytes[src];
    rgba[i * 4 + 1] = bytes[src + (channels === 3 ? 1 : 0)];
    rgba[i * 4 + 2] = bytes[src + (channels === 3 ? 2 : 0)];
    rgba[i * 4 + 3] = 255;
  }
  return { width, height, rgba };
}

export function base64ToBytes(b64: string): Uint8Array {
  const bin = atob(b64);
  const out = new Uint8Array(bin.length);
  for (let i = 0; i < bin.length; i++) out[i] = bin.charCodeAt(i);
  return out;
}
