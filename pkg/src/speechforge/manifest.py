"""JSON-lines utterance manifests and their pipeline operations.

One record per line with fields id, audio, duration, transcript, speaker,
origin (real | tts | pseudo). Operations never mutate inputs; outputs are
new record lists written to new files.
"""

from __future__ import annotations

import json
import sys
from dataclasses import asdict, dataclass
from pathlib import Path

from .bpe import BpeModel, bpe_tokens
from .errors import DataError
from .spectral import FrameParams

ORIGINS = ("real", "tts", "pseudo")
DEFAULT_MIN_DUR = 0.5
DEFAULT_MAX_DUR = 30.0
SUBSAMPLE_FACTOR = 4


@dataclass
class UtteranceRecord:
    id: str
    audio: str
    duration: float
    transcript: str
    speaker: str = ""
    origin: str = "real"

    def __post_init__(self):
        if not self.id:
            raise ValueError("record id must be non-empty")
        if self.duration <= 0.0:
            raise ValueError(f"{self.id}: duration must be positive")
        if self.origin not in ORIGINS:
            raise ValueError(f"{self.id}: unknown origin {self.origin!r}")


def read_manifest(path: str | Path, strict: bool = True) -> list[UtteranceRecord]:
    """Parse a manifest; malformed lines abort under strict, else are
    reported to stderr with their line numbers and skipped."""
    records = []
    seen = set()
    for lineno, line in enumerate(Path(path).read_text().splitlines(), 1):
        if not line.strip():
            continue
        try:
            doc = json.loads(line)
            rec = UtteranceRecord(
                id=doc["id"],
                audio=doc["audio"],
                duration=float(doc["duration"]),
                transcript=doc["transcript"],
                speaker=doc.get("speaker", ""),
                origin=doc.get("origin", "real"),
            )
            if rec.id in seen:
                raise ValueError(f"duplicate id {rec.id}")
            seen.add(rec.id)
        except (json.JSONDecodeError, KeyError, TypeError, ValueError) as exc:
            msg = f"{path}:{lineno}: bad manifest record: {exc}"
            if strict:
                raise DataError(msg) from exc
            print(f"warning: {msg}", file=sys.stderr)
            continue
        records.append(rec)
    return records


def write_manifest(path: str | Path, records: list[UtteranceRecord]) -> None:
    with open(path, "w") as f:
        for rec in records:
            f.write(json.dumps(asdict(rec), sort_keys=True) + "\n")


def expected_frames(duration: float, sample_rate: int, p: FrameParams) -> int:
    return int(duration * sample_rate) // p.hop_len + 1


def manifest_filter(
    records: list[UtteranceRecord],
    min_dur: float = DEFAULT_MIN_DUR,
    max_dur: float = DEFAULT_MAX_DUR,
    bpe: BpeModel | None = None,
    frame_params: FrameParams | None = None,
    sample_rate: int = 16000,
) -> list[UtteranceRecord]:
    """Keep records with min_dur <= duration <= max_dur.

    With a BPE model and frame geometry, additionally drop records whose
    labels cannot align under CTC after 4x encoder subsampling
    (2 * tokens + 1 > frames / 4).
    """
    if not (0.0 < min_dur < max_dur):
        raise ValueError(f"need 0 < min_dur < max_dur, got [{min_dur}, {max_dur}]")
    out = []
    for rec in records:
        if not (min_dur <= rec.duration <= max_dur):
            continue
        if bpe is not None:
            if frame_params is None:
                raise ValueError("CTC feasibility check needs frame geometry")
            n_tokens = len(bpe_tokens(rec.transcript, bpe))
            frames = expected_frames(rec.duration, sample_rate, frame_params)
            if 2 * n_tokens + 1 > frames // SUBSAMPLE_FACTOR:
                continue
        out.append(rec)
    return out


def _format_factor(factor: float) -> str:
    return f"{factor:g}"


def manifest_expand_speed(
    records: list[UtteranceRecord], factors: list[float]
) -> list[UtteranceRecord]:
    """Original plus one speed-perturbed copy per factor, grouped per input.

    Copies are named "<id>-sp<factor>" with duration scaled by 1/factor and
    derived audio paths.
    """
    factors = [f for f in factors if f != 1.0]
    if len(set(factors)) != len(factors):
        raise ValueError("duplicate perturbation factors")
    out = []
    seen = set()
    for rec in records:
        group = [rec]
        for factor in factors:
            if factor <= 0.0:
                raise ValueError(f"perturbation factor must be positive, got {factor}")
            tag = _format_factor(factor)
            audio = Path(rec.audio)
            group.append(
                UtteranceRecord(
                    id=f"{rec.id}-sp{tag}",
                    audio=str(audio.with_name(f"{audio.stem}-sp{tag}{audio.suffix}")),
                    duration=rec.duration / factor,
                    transcript=rec.transcript,
                    speaker=rec.speaker,
                    origin=rec.origin,
                )
            )
        for g in group:
            if g.id in seen:
                raise DataError(f"id collision after expansion: {g.id}")
            seen.add(g.id)
        out.extend(group)
    return out


def manifest_merge(
    core: list[UtteranceRecord],
    additional: list[UtteranceRecord],
    origin_tag: str,
) -> list[UtteranceRecord]:
    """Concatenate, tagging the additional records' origin; core comes first."""
    if origin_tag not in ORIGINS:
        raise ValueError(f"unknown origin tag {origin_tag!r}")
    tagged = [
        UtteranceRecord(r.id, r.audio, r.duration, r.transcript, r.speaker, origin_tag)
        for r in additional
    ]
    out = list(core) + tagged
    seen: set[str] = set()
    for rec in out:
        if rec.id in seen:
            raise DataError(f"duplicate id across manifests: {rec.id}")
        seen.add(rec.id)
    return out


def attach_pseudo_labels(
    records: list[UtteranceRecord], hyps: dict[str, str]
) -> tuple[list[UtteranceRecord], int]:
    """Replace transcripts with hypotheses, origin=pseudo.

    Records without a hypothesis are dropped; returns (records, n_dropped).
    Hypothesis ids missing from the manifest only produce a warning.
    """
    ids = {r.id for r in records}
    for hyp_id in hyps:
        if hyp_id not in ids:
            print(f"warning: hypothesis id {hyp_id} not in manifest, skipped", file=sys.stderr)
    out = []
    dropped = 0
    for rec in records:
        if rec.id not in hyps:
            dropped += 1
            continue
        out.append(
            UtteranceRecord(
                rec.id, rec.audio, rec.duration, hyps[rec.id], rec.speaker, "pseudo"
            )
        )
    return out, dropped
