"""Green-screen background augmentation toolkit for robot demonstration frames."""

__version__ = "0.1.0"

from .compositing import CoveragePlan, blackout, composite, plan_coverage
from .baseline import CvAugParams, cvaug, photometric_distort, random_shift
from .imaging import Frame, Matte, YCbCrPixel, load_frame, rgb_to_ycbcr, save_frame
from .inpaint import EndpointConfig, InpaintClient, InpaintRequest, health_check, inpaint
from .keying import (
    ChromaKeySpec,
    combine_mattes,
    compute_matte,
    matte_stats,
    pick_key_colour,
)
from .pipeline import (
    DatasetIndex,
    EpisodeManifest,
    JobConfig,
    JobReport,
    export_mask_dataset,
    run_job,
    scan_dataset,
    verify_dataset,
)
from .textures import PerlinParams, TextureSource, dataset_entropy, perlin_field, sample_texture

__all__ = [
    "ChromaKeySpec",
    "CoveragePlan",
    "CvAugParams",
    "DatasetIndex",
    "EndpointConfig",
    "EpisodeManifest",
    "Frame",
    "InpaintClient",
    "InpaintRequest",
    "JobConfig",
    "JobReport",
    "Matte",
    "PerlinParams",
    "TextureSource",
    "YCbCrPixel",
    "blackout",
    "combine_mattes",
    "composite",
    "compute_matte",
    "cvaug",
    "dataset_entropy",
    "export_mask_dataset",
    "health_check",
    "inpaint",
    "load_frame",
    "matte_stats",
    "perlin_field",
    "photometric_distort",
    "pick_key_colour",
    "plan_coverage",
    "random_shift",
    "rgb_to_ycbcr",
    "run_job",
    "sample_texture",
    "save_frame",
    "scan_dataset",
    "verify_dataset",
]
