from .image import SSIM_K1, SSIM_K2, SSIM_SIGMA, SSIM_WINDOW, psnr, ssim
from .report import MetricReport, write_reports
from .surface import DEFAULT_SAMPLE_COUNT, chamfer, p2s, sample_surface
