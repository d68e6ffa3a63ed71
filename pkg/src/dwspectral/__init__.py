"""Multispectral classification of diffusion-weighted MR volumes.

Synthesis of DW volumes from a tissue phantom, ADC maps, MLP / RBF /
polynomial-network / fuzzy c-means voxel classifiers, and agreement metrics.
"""

from .adc import AdcConfig, compute_adc_map
from .errors import DwSpectralError
from .features import TrainingSet, build_training_set, make_roi_masks, normalize, stack_bands
from .metrics import confusion_matrix, global_accuracy, kappa, volume_report
from .signal import (
    AcquisitionParams,
    NoiseModel,
    Phantom,
    add_noise,
    compute_b_value,
    make_brain_phantom,
    synthesize_dwi,
)
from .volume import Grid3, MultispectralVolume, Volume

__version__ = "0.1.0"
