"""Local Quadruple Pattern face descriptor and its retrieval/recognition evaluation."""

__version__ = "0.1.0"

from .image_core import (  # noqa: E402
    DimensionError,
    GrayImage,
    read_image,
    to_grayscale,
    window4,
    write_pgm,
)
from .descriptors import (  # noqa: E402
    ComparisonCounter,
    DescriptorSpec,
    FeatureImageSet,
    FeatureVector,
    QuadrupleCodes,
    count_comparisons,
    cslbp_code,
    encode_order,
    encode_threshold,
    extract,
    feature_images,
    lbp_code,
    lqpat_codes,
)
from .similarity import RankedRetrieval, chi_square, classify_1nn, rank_gallery  # noqa: E402
from .evaluation import (  # noqa: E402
    CrossValConfig,
    anmrr,
    arp_arr,
    cmc,
    cross_validate,
    feature_entropy,
    precision_recall_at,
    recognition_rate,
    retrieval_report,
)
from .dataset import LabeledDataset, extract_all, load_features, save_features, scan  # noqa: E402
