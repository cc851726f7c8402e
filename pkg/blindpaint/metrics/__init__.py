from .quality import psnr, psnr_capped, ssim, mse, PSNR_CAP
from .masks import mask_mae, mask_iou, iou_both_empty, ics, identity_features
from .report import EvalRow, EvalReport, evaluate_sample, COLUMNS, METRICS
