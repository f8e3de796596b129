"""Adaptive spatio-temporal error concealment for isolated block losses in raw video."""

from .fse import (
    ProjectionArea,
    WeightFunction,
    build_weights,
    compensate,
    compute_mu,
    generate_model,
    project,
    refine_block,
    select_basis,
)
from .loss_sim import BlockLoss, LossMap, apply_losses, generate_losses
from .metrics import EvaluationReport, psnr_lost_blocks, write_report_csv
from .pipeline import ConcealmentConfig, conceal_block, conceal_sequence
from .temporal import Displacement, Method, dmve, ebma, estimate_temporal_error, temporal_replacement
from .video_io import Frame, Sequence, read_yuv420, write_frame_image, write_yuv420

__version__ = "0.1.0"
