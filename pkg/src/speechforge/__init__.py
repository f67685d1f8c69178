"""speechforge: speech-data augmentation and evaluation toolkit."""

from .audio import Waveform, read_wav, resample, write_wav
from .augment import SpecAugmentConfig, spec_augment, speed_perturb
from .beam import FusionWeights, Hypothesis, NGramScorer, SequenceScorer, TableScorer, ctc_prefix_beam, fuse_scores
from .bpe import BpeModel, bpe_decode, bpe_encode, bpe_tokens, bpe_train
from .ctc import PosteriorGram, ctc_grad, ctc_greedy, ctc_loss
from .errors import DataError
from .features import FeatureMatrix, PitchConfig, cmvn, fbank_pitch
from .glim import GriffinLimConfig, GriffinLimResult, griffin_lim, mel_to_linear, spectral_convergence
from .lexicon import Lexicon, OovError, lexicon_lookup, load_lexicon
from .lpc import (
    LpcFrame,
    VocoderSequence,
    chunk_training_sequences,
    levinson_durbin,
    lpc_analysis,
    lpc_synthesis,
    mel_to_lpc,
    mu_law_decode,
    mu_law_encode,
    spectral_flatness,
)
from .manifest import (
    UtteranceRecord,
    attach_pseudo_labels,
    manifest_expand_speed,
    manifest_filter,
    manifest_merge,
    read_manifest,
    write_manifest,
)
from .ngram import NGramModel, ngram_logprob, ngram_train, sentence_logprob
from .spectral import (
    ComplexSpectrogram,
    FrameParams,
    MelFilterbank,
    MelSpectrogram,
    hz_to_mel,
    istft,
    mel_filterbank,
    mel_spectrogram,
    mel_to_hz,
    stft,
)
from .ttsloss import DiagGaussian, MixturePrior, gauss_kl, l1_distance, mixture_kl_mc
from .wer import WerBreakdown, corpus_wer, relative_improvement, wer

__version__ = "0.1.0"
