"""Manifest-driven batch CLI.

Verbs: featex, augment, glim, lpcprep, bpe, lm, decode, score, manifest,
ttsloss. Exit codes: 0 ok, 1 usage error, 2 data error. SPEECHFORGE_THREADS
caps the per-utterance worker pool.
"""

from __future__ import annotations

import argparse
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import fmx
from .audio import read_wav, write_wav
from .augment import SpecAugmentConfig, spec_augment, speed_perturb
from .beam import FusionWeights, NGramScorer, ctc_prefix_beam
from .bpe import bpe_decode, bpe_encode, bpe_tokens, bpe_train, load_bpe, save_bpe
from .config import PipelineConfig, load_config
from .ctc import PosteriorGram, ctc_greedy
from .errors import DataError
from .features import FeatureMatrix, cmvn, fbank_pitch
from .glim import GriffinLimConfig, griffin_lim, mel_to_linear
from .lpc import DEFAULT_LPC_ORDER, chunk_training_sequences
from .manifest import (
    attach_pseudo_labels,
    manifest_expand_speed,
    manifest_filter,
    manifest_merge,
    read_manifest,
    write_manifest,
)
from .ngram import load_ngram, ngram_train, save_ngram, sentence_logprob
from .spectral import MelSpectrogram, mel_filterbank, mel_spectrogram
from .ttsloss import l1_distance, load_gaussian, load_prior, mixture_kl_mc
from .wer import corpus_wer, pair_refs_hyps, read_trn, relative_improvement, wer


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(1, f"{self.prog}: error: {message}\n")


def _n_workers(n_jobs: int) -> int:
    cap = os.environ.get("SPEECHFORGE_THREADS")
    workers = int(cap) if cap else (os.cpu_count() or 1)
    return max(1, min(workers, n_jobs)) if n_jobs else 1


def _load_cfg(args) -> PipelineConfig:
    return load_config(args.config) if getattr(args, "config", None) else PipelineConfig()


def _resolve_audio(manifest_path: str, audio: str) -> Path:
    p = Path(audio)
    return p if p.is_absolute() else Path(manifest_path).parent / p


def _read_wav_checked(path: Path, cfg: PipelineConfig):
    w = read_wav(path)
    if w.sample_rate != cfg.sample_rate:
        raise DataError(
            f"{path}: sample rate {w.sample_rate} differs from configured"
            f" {cfg.sample_rate}"
        )
    return w


# --- featex ---------------------------------------------------------------

def cmd_featex(args) -> int:
    cfg = _load_cfg(args)
    params = cfg.frame_params()
    fb = mel_filterbank(cfg.n_mels, params, cfg.sample_rate, cfg.fmin, cfg.fmax)

    def extract(path: Path) -> FeatureMatrix:
        feats = fbank_pitch(_read_wav_checked(path, cfg), params, fb, cfg.pitch)
        if args.cmvn == "per-utt":
            feats = cmvn(feats, "per_utterance")
        return feats

    if args.wav:
        feats = extract(Path(args.wav))
        fmx.write_fmx(args.out_file, feats.values)
        print(f"wrote {feats.n_frames}x{feats.dim} features to {args.out_file}")
        return 0

    records = read_manifest(args.manifest, strict=not args.no_strict)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def job(rec):
        feats = extract(_resolve_audio(args.manifest, rec.audio))
        fmx.write_fmx(out_dir / f"{rec.id}.fmx", feats.values)
        return rec.id

    with ThreadPoolExecutor(max_workers=_n_workers(len(records))) as pool:
        done = list(pool.map(job, records))
    print(f"wrote {len(done)} feature files to {out_dir}")
    return 0


# --- augment ---------------------------------------------------------------

def cmd_augment_speed(args) -> int:
    w = read_wav(args.infile)
    write_wav(args.out, speed_perturb(w, args.factor))
    return 0


def cmd_augment_specaug(args) -> int:
    values = fmx.read_fmx(args.infile).astype(np.float64)
    cfg = SpecAugmentConfig(
        n_freq_masks=args.freq_masks,
        max_freq_width=args.freq_width,
        n_time_masks=args.time_masks,
        max_time_width=args.time_width,
        fill_mode=args.fill,
        seed=args.seed,
    )
    out = spec_augment(FeatureMatrix(values), cfg)
    fmx.write_fmx(args.out, out.values)
    return 0


# --- glim ------------------------------------------------------------------

def cmd_glim(args) -> int:
    cfg = _load_cfg(args)
    params = cfg.frame_params()
    matrix = fmx.read_fmx(args.mel).astype(np.float64)
    if args.from_linear:
        mag = matrix
    else:
        fb = mel_filterbank(matrix.shape[1], params, cfg.sample_rate, cfg.fmin, cfg.fmax)
        mel = MelSpectrogram(matrix, params, fb)
        mag = mel_to_linear(mel, fb)
    gl_cfg = GriffinLimConfig(n_iters=args.iters, init=cfg.griffin_lim.init, seed=cfg.griffin_lim.seed)
    result = griffin_lim(mag, params, gl_cfg, sample_rate=cfg.sample_rate)
    write_wav(args.out, result.waveform)
    print(f"griffin-lim: {args.iters} iterations, final error {result.errors[-1]:.6f}")
    if args.report:
        from .reporting import write_convergence_report

        tsv, png = write_convergence_report(args.report, result.errors)
        print(f"wrote {tsv} and {png}")
    return 0


# --- lpcprep ---------------------------------------------------------------

def cmd_lpcprep(args) -> int:
    cfg = _load_cfg(args)
    params = cfg.frame_params()
    fb = mel_filterbank(cfg.n_mels, params, cfg.sample_rate, cfg.fmin, cfg.fmax)
    records = read_manifest(args.manifest, strict=not args.no_strict)
    out_dir = Path(args.out)
    out_dir.mkdir(parents=True, exist_ok=True)

    def job(rec):
        w = _read_wav_checked(_resolve_audio(args.manifest, rec.audio), cfg)
        mel = mel_spectrogram(w, params, fb)
        chunks = chunk_training_sequences(w, mel, order=args.order)
        fmx.write_fmx(out_dir / f"{rec.id}.fmx", mel.values)
        with open(out_dir / f"{rec.id}.exc", "wb") as f:
            for chunk in chunks:
                f.write(chunk.excitation.tobytes())
        with open(out_dir / f"{rec.id}.lpc.txt", "w") as f:
            for chunk in chunks:
                for frame in chunk.lpc:
                    f.write(f"{frame.pred_error:.10e} {frame.flatness:.10f}\n")
        return len(chunks)

    with ThreadPoolExecutor(max_workers=_n_workers(len(records))) as pool:
        counts = list(pool.map(job, records))
    print(f"prepared {sum(counts)} training sequences from {len(records)} utterances")
    return 0


# --- bpe ---------------------------------------------------------------

def cmd_bpe_train(args) -> int:
    corpus = Path(args.corpus).read_text(encoding="utf-8").splitlines()
    model = bpe_train(corpus, args.vocab_size)
    save_bpe(args.out, model)
    print(f"trained BPE model: {model.vocab_size} tokens, {len(model.merges)} merges")
    return 0


def cmd_bpe_encode(args) -> int:
    model = load_bpe(args.model)
    lines = Path(args.infile).read_text(encoding="utf-8").splitlines()
    with open(args.out, "w", encoding="utf-8") as f:
        for line in lines:
            if args.tokens:
                f.write(" ".join(bpe_tokens(line, model)) + "\n")
            else:
                f.write(" ".join(str(i) for i in bpe_encode(line, model)) + "\n")
    return 0


def cmd_bpe_decode(args) -> int:
    model = load_bpe(args.model)
    lines = Path(args.infile).read_text(encoding="utf-8").splitlines()
    with open(args.out, "w", encoding="utf-8") as f:
        for line in lines:
            ids = [int(tok) for tok in line.split()]
            f.write(bpe_decode(ids, model) + "\n")
    return 0


# --- lm ---------------------------------------------------------------

def cmd_lm_train(args) -> int:
    corpus = Path(args.corpus).read_text(encoding="utf-8").splitlines()
    model = ngram_train(corpus, order=args.order, smoothing=args.smoothing, k=args.k)
    save_ngram(args.out, model)
    print(f"trained {args.order}-gram LM over {len(model.vocab)} tokens")
    return 0


def cmd_lm_score(args) -> int:
    model = load_ngram(args.model)
    total = 0.0
    for line in Path(args.infile).read_text(encoding="utf-8").splitlines():
        lp = sentence_logprob(model, line.split())
        total += lp
        print(f"{lp:.6f}\t{line}")
    print(f"total\t{total:.6f}")
    return 0


# --- decode ---------------------------------------------------------------

def cmd_decode(args) -> int:
    log_probs = fmx.read_fmx(args.post).astype(np.float64)
    # float32 storage loses the exact row normalization; restore it
    rowsums = np.log(np.exp(log_probs).sum(axis=1))
    if np.max(np.abs(rowsums)) > 1e-3:
        raise DataError(f"{args.post}: rows are not log-probabilities")
    log_probs = log_probs - rowsums[:, None]
    vocab = Path(args.vocab).read_text(encoding="utf-8").splitlines()
    pg = PosteriorGram(log_probs, vocab)

    prefix = f"{args.utt_id} " if args.utt_id else ""
    if args.greedy:
        tokens = ctc_greedy(pg)
        text = " ".join(vocab[i] for i in tokens)
        print(f"{prefix}{text}")
        return 0

    lm = None
    if args.lm:
        lm = NGramScorer(load_ngram(args.lm), vocab)
    weights = FusionWeights(args.ctc_weight, args.lm_weight, args.beam)
    hyps = ctc_prefix_beam(pg, weights, lm=lm)[: args.nbest]
    lines = []
    for h in hyps:
        text = " ".join(vocab[i] for i in h.tokens)
        if args.best_only:
            lines.append(f"{prefix}{text}")
            break
        lines.append(
            f"{prefix}{h.score_total:.6f}\t{h.score_ctc:.6f}\t{h.score_aux:.6f}"
            f"\t{h.score_lm:.6f}\t{text}"
        )
    out_text = "\n".join(lines)
    print(out_text)
    if args.out:
        Path(args.out).write_text(out_text + "\n", encoding="utf-8")
    return 0


# --- score ---------------------------------------------------------------

def cmd_score_wer(args) -> int:
    refs = read_trn(args.ref)
    hyps = read_trn(args.hyp)
    pairs = pair_refs_hyps(refs, hyps)
    pooled = corpus_wer(pairs)
    per_utt = {utt_id: wer(r, h) for utt_id, (r, h) in pairs.items()}
    if args.per_utt:
        for utt_id in sorted(per_utt):
            b = per_utt[utt_id]
            print(
                f"{utt_id}\twer={b.wer:.1f}\tsub={b.substitutions}"
                f"\tdel={b.deletions}\tins={b.insertions}\tref={b.ref_words}"
            )
    print(
        f"WER {pooled.wer:.1f}% (sub={pooled.substitutions} del={pooled.deletions}"
        f" ins={pooled.insertions} ref={pooled.ref_words})"
    )
    if args.report:
        from .reporting import write_wer_report

        tsv, png = write_wer_report(args.report, pooled, per_utt)
        print(f"wrote {tsv} and {png}")
    return 0


def cmd_score_impr(args) -> int:
    print(f"{relative_improvement(args.baseline, args.system):.1f}")
    return 0


def cmd_score_compare(args) -> int:
    systems = []
    for part in args.systems.split(","):
        name, _, value = part.partition("=")
        if not value:
            raise DataError(f"bad system spec {part!r}, expected NAME=WER")
        systems.append((name.strip(), float(value)))
    baseline = args.baseline or systems[0][0]
    base_wer = dict(systems)[baseline]
    print("system\twer\timpr")
    for name, wer_pct in systems:
        print(f"{name}\t{wer_pct:.1f}\t{relative_improvement(base_wer, wer_pct):.1f}")
    if args.report:
        from .reporting import write_comparison_report

        tsv, png = write_comparison_report(args.report, systems, baseline)
        print(f"wrote {tsv} and {png}")
    return 0


# --- manifest ---------------------------------------------------------------

def cmd_manifest_filter(args) -> int:
    cfg = _load_cfg(args)
    records = read_manifest(args.infile, strict=not args.no_strict)
    bpe_model = load_bpe(args.bpe) if args.bpe else None
    kept = manifest_filter(
        records,
        args.min_dur,
        args.max_dur,
        bpe=bpe_model,
        frame_params=cfg.frame_params() if bpe_model else None,
        sample_rate=cfg.sample_rate,
    )
    write_manifest(args.out, kept)
    print(f"kept {len(kept)} of {len(records)} records")
    return 0


def cmd_manifest_expand(args) -> int:
    records = read_manifest(args.infile, strict=not args.no_strict)
    factors = [float(v) for v in args.factors.split(",")] if args.factors else []
    out = manifest_expand_speed(records, factors)
    write_manifest(args.out, out)
    print(f"expanded {len(records)} records to {len(out)}")
    return 0


def cmd_manifest_merge(args) -> int:
    core = read_manifest(args.core, strict=not args.no_strict)
    additional = read_manifest(args.additional, strict=not args.no_strict)
    out = manifest_merge(core, additional, args.origin)
    write_manifest(args.out, out)
    print(f"merged {len(core)} + {len(additional)} records")
    return 0


def cmd_manifest_pseudo(args) -> int:
    records = read_manifest(args.infile, strict=not args.no_strict)
    hyps = read_trn(args.hyp)
    out, dropped = attach_pseudo_labels(records, hyps)
    write_manifest(args.out, out)
    print(f"attached {len(out)} pseudo labels, dropped {dropped} records")
    return 0


# --- ttsloss ---------------------------------------------------------------

def cmd_ttsloss_l1(args) -> int:
    a = fmx.read_fmx(args.pred).astype(np.float64)
    b = fmx.read_fmx(args.target).astype(np.float64)
    print(f"{l1_distance(a, b):.8f}")
    return 0


def cmd_ttsloss_kl(args) -> int:
    q = load_gaussian(args.q)
    prior = load_prior(args.prior)
    estimate, std_error = mixture_kl_mc(q, prior, args.samples, args.seed)
    print(f"{estimate:.6f} {std_error:.6f}")
    return 0


# --- parser ---------------------------------------------------------------

def build_parser() -> _Parser:
    parser = _Parser(prog="speechforge", description=__doc__)
    sub = parser.add_subparsers(dest="verb", required=True)

    p = sub.add_parser("featex", help="extract fbank-pitch features")
    p.add_argument("--manifest")
    p.add_argument("--out", help="output directory for manifest mode")
    p.add_argument("--wav", help="single-file mode input")
    p.add_argument("--out-file", help="single-file mode output FMX")
    p.add_argument("--cmvn", choices=["per-utt", "none"], default="none")
    p.add_argument("--config")
    p.add_argument("--no-strict", action="store_true")
    p.set_defaults(func=cmd_featex)

    aug = sub.add_parser("augment", help="waveform/feature augmentation").add_subparsers(
        dest="kind", required=True
    )
    p = aug.add_parser("speed")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--factor", type=float, required=True)
    p.set_defaults(func=cmd_augment_speed)
    p = aug.add_parser("specaug")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--freq-masks", type=int, default=2)
    p.add_argument("--freq-width", type=int, default=30)
    p.add_argument("--time-masks", type=int, default=2)
    p.add_argument("--time-width", type=int, default=40)
    p.add_argument("--fill", choices=["mean", "zero"], default="mean")
    p.set_defaults(func=cmd_augment_specaug)

    p = sub.add_parser("glim", help="invert a (Mel-)spectrogram to audio")
    p.add_argument("--mel", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--iters", type=int, default=60)
    p.add_argument("--from-linear", action="store_true")
    p.add_argument("--report")
    p.add_argument("--config")
    p.set_defaults(func=cmd_glim)

    p = sub.add_parser("lpcprep", help="vocoder training-data preparation")
    p.add_argument("--manifest", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--order", type=int, default=DEFAULT_LPC_ORDER)
    p.add_argument("--config")
    p.add_argument("--no-strict", action="store_true")
    p.set_defaults(func=cmd_lpcprep)

    bpe = sub.add_parser("bpe", help="subword tokenizer").add_subparsers(
        dest="kind", required=True
    )
    p = bpe.add_parser("train")
    p.add_argument("--corpus", required=True)
    p.add_argument("--vocab-size", type=int, default=5000)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bpe_train)
    p = bpe.add_parser("encode")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--tokens", action="store_true", help="emit token strings, not ids")
    p.set_defaults(func=cmd_bpe_encode)
    p = bpe.add_parser("decode")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_bpe_decode)

    lm = sub.add_parser("lm", help="backoff n-gram language model").add_subparsers(
        dest="kind", required=True
    )
    p = lm.add_parser("train")
    p.add_argument("--corpus", required=True)
    p.add_argument("--order", type=int, default=4)
    p.add_argument("--smoothing", choices=["witten_bell", "add_k"], default="witten_bell")
    p.add_argument("--k", type=float, default=1.0)
    p.add_argument("--out", required=True)
    p.set_defaults(func=cmd_lm_train)
    p = lm.add_parser("score")
    p.add_argument("--model", required=True)
    p.add_argument("--in", dest="infile", required=True)
    p.set_defaults(func=cmd_lm_score)

    p = sub.add_parser("decode", help="CTC beam decoding with fusion")
    p.add_argument("--post", required=True)
    p.add_argument("--vocab", required=True)
    p.add_argument("--beam", type=int, default=20)
    p.add_argument("--ctc-weight", type=float, default=0.5)
    p.add_argument("--lm")
    p.add_argument("--lm-weight", type=float, default=0.7)
    p.add_argument("--nbest", type=int, default=5)
    p.add_argument("--greedy", action="store_true")
    p.add_argument("--best-only", action="store_true")
    p.add_argument("--utt-id")
    p.add_argument("--out")
    p.set_defaults(func=cmd_decode)

    score = sub.add_parser("score", help="WER scoring and comparison arithmetic").add_subparsers(
        dest="kind", required=True
    )
    p = score.add_parser("wer")
    p.add_argument("--ref", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--per-utt", action="store_true")
    p.add_argument("--report")
    p.set_defaults(func=cmd_score_wer)
    p = score.add_parser("impr")
    p.add_argument("--baseline", type=float, required=True)
    p.add_argument("--system", type=float, required=True)
    p.set_defaults(func=cmd_score_impr)
    p = score.add_parser("compare")
    p.add_argument("--systems", required=True, help="NAME=WER[,NAME=WER...]")
    p.add_argument("--baseline")
    p.add_argument("--report")
    p.set_defaults(func=cmd_score_compare)

    man = sub.add_parser("manifest", help="manifest operations").add_subparsers(
        dest="kind", required=True
    )
    p = man.add_parser("filter")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--min-dur", type=float, default=0.5)
    p.add_argument("--max-dur", type=float, default=30.0)
    p.add_argument("--bpe", help="BPE model enabling the CTC feasibility check")
    p.add_argument("--config")
    p.add_argument("--no-strict", action="store_true")
    p.set_defaults(func=cmd_manifest_filter)
    p = man.add_parser("expand-speed")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--factors", default="0.9,1.1")
    p.add_argument("--no-strict", action="store_true")
    p.set_defaults(func=cmd_manifest_expand)
    p = man.add_parser("merge")
    p.add_argument("--core", required=True)
    p.add_argument("--additional", required=True)
    p.add_argument("--origin", default="tts", choices=["real", "tts", "pseudo"])
    p.add_argument("--out", required=True)
    p.add_argument("--no-strict", action="store_true")
    p.set_defaults(func=cmd_manifest_merge)
    p = man.add_parser("pseudo")
    p.add_argument("--in", dest="infile", required=True)
    p.add_argument("--hyp", required=True)
    p.add_argument("--out", required=True)
    p.add_argument("--no-strict", action="store_true")
    p.set_defaults(func=cmd_manifest_pseudo)

    tts = sub.add_parser("ttsloss", help="synthesizer loss numerics").add_subparsers(
        dest="kind", required=True
    )
    p = tts.add_parser("l1")
    p.add_argument("--pred", required=True)
    p.add_argument("--target", required=True)
    p.set_defaults(func=cmd_ttsloss_l1)
    p = tts.add_parser("kl")
    p.add_argument("--q", required=True)
    p.add_argument("--prior", required=True)
    p.add_argument("--samples", type=int, default=10000)
    p.add_argument("--seed", type=int, default=0)
    p.set_defaults(func=cmd_ttsloss_kl)

    return parser


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    # `ttsloss --pred a --target b` is shorthand for `ttsloss l1 ...`
    if argv and argv[0] == "ttsloss" and len(argv) > 1 and argv[1].startswith("--"):
        argv.insert(1, "l1")
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.verb == "featex":
        if bool(args.wav) == bool(args.manifest):
            parser.error("featex needs exactly one of --manifest or --wav")
        if args.wav and not args.out_file:
            parser.error("featex --wav requires --out-file")
        if args.manifest and not args.out:
            parser.error("featex --manifest requires --out")
    try:
        return args.func(args)
    except (DataError, ValueError, OSError) as exc:
        print(f"speechforge: error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
