// Mono PCM16 RIFF, matching the core's canonical 44-byte header layout.

export interface WavData {
  samples: Float32Array; // normalized by 1/32768
  sampleRate: number;
}

export function decodeWav(blob: Buffer): WavData {
  if (blob.toString("latin1", 0, 4) !== "RIFF" || blob.toString("latin1", 8, 12) !== "WAVE") {
    throw new Error("not a RIFF/WAVE blob");
  }
  let offset = 12;
  let sampleRate = 0;
  let channels = 0;
  let bits = 0;
  let data: Buffer | null = null;
  while (offset + 8 <= blob.length) {
    const chunkId = blob.toString("latin1", offset, offset + 4);
    const size = blob.readUInt32LE(offset + 4);
    const body = blob.subarray(offset + 8, offset + 8 + size);
    if (chunkId === "fmt ") {
      channels = body.readUInt16LE(2);
      sampleRate = body.readUInt32LE(4);
      bits = body.readUInt16LE(14);
    } else if (chunkId === "data") {
      data = body;
    }
    offset += 8 + size + (size % 2);
  }
  if (!data || sampleRate === 0) {
    throw new Error("missing fmt or data chunk");
  }
  if (channels !== 1 || bits !== 16) {
    throw new Error(`unsupported WAV layout: ${channels} channels, ${bits} bit`);
  }
  const n = Math.floor(data.length / 2);
  const samples = new Float32Array(n);
  for (let i = 0; i < n; i++) {
    samples[i] = data.readInt16LE(i * 2) / 32768;
  }
  return { samples, sampleRate };
}

export function encodeWav(samples: Float32Array, sampleRate: number): Buffer {
  const n = samples.length;
  const out = Buffer.alloc(44 + n * 2);
  out.write("RIFF", 0, "latin1");
  out.writeUInt32LE(36 + n * 2, 4);
  out.write("WAVE", 8, "latin1");
  out.write("fmt ", 12, "latin1");
  out.writeUInt32LE(16, 16);
  out.writeUInt16LE(1, 20); // PCM
  out.writeUInt16LE(1, 22); // mono
  out.writeUInt32LE(sampleRate, 24);
  out.writeUInt32LE(sampleRate * 2, 28);
  out.writeUInt16LE(2, 32);
  out.writeUInt16LE(16, 34);
  out.write("data", 36, "latin1");
  out.writeUInt32LE(n * 2, 40);
  for (let i = 0; i < n; i++) {
    // round half to even, matching the core's quantizer
    const scaled = samples[i] * 32768;
    let q = Math.round(scaled);
    if (Math.abs(scaled - Math.trunc(scaled)) === 0.5 && q % 2 !== 0) {
      q -= Math.sign(scaled);
    }
    const clipped = Math.max(-32768, Math.min(32767, q));
    out.writeInt16LE(clipped, 44 + i * 2);
  }
  return out;
}
