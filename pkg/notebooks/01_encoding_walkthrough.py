"""
Encoding a face patch with LQPAT
================================

Walks through one 4x4 window by hand, then encodes a whole synthetic image
and looks at the two feature images it produces.
"""

# %%
import numpy as np

from lqpat import (
    ComparisonCounter,
    DescriptorSpec,
    GrayImage,
    count_comparisons,
    extract,
    feature_entropy,
    feature_images,
    lqpat_codes,
)

# %% [markdown]
# A single window. The four 2x2 blocks are red (top-left), green (top-right),
# blue (bottom-right) and purple (bottom-left). ``a`` packs the red->green
# and green->blue comparisons, ``b`` the blue->purple and purple->red ones.

# %%
block = np.array([[5, 10, 20, 15],
                  [30, 25, 10, 40],
                  [50, 5, 60, 20],
                  [8, 90, 35, 70]])
codes = lqpat_codes(block)
print("a =", codes.a, f"({codes.a:08b})")
print("b =", codes.b, f"({codes.b:08b})")

# %% [markdown]
# Only pixel order matters, so any strictly increasing remapping of the
# intensities (a gamma curve, a contrast stretch) gives the same codes.

# %%
stretched = np.round(255 * (block / 90.0) ** 0.5).astype(int)
print(lqpat_codes(stretched) == codes)

# %% [markdown]
# A whole image: a smooth synthetic "face" with some texture on top.

# %%
rng = np.random.default_rng(0)
yy, xx = np.mgrid[0:64, 0:56]
face = 120 + 60 * np.exp(-((yy - 30) ** 2 + (xx - 28) ** 2) / 400.0)
face += rng.normal(0, 8, size=face.shape)
img = GrayImage(np.clip(face, 0, 255).astype(np.uint8))

fis = feature_images(img, "lqpat")
a_img, b_img = fis.images
print("feature image shape:", a_img.shape)
print("mean feature-image entropy: %.3f bits" % feature_entropy(fis))

# %%
counter = ComparisonCounter()
vec = extract(img, DescriptorSpec("lqpat"), counter)
print("bins:", vec.bin_count, " sum:", vec.bins.sum())
print("comparisons:", counter.total, "=", count_comparisons("lqpat", img.shape))

# %%
for kind in ("lbp", "cslbp"):
    fis = feature_images(img, kind)
    print(kind, "entropy %.3f bits" % feature_entropy(fis),
          " bins", extract(img, kind).bin_count)

# %%
try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    fig, axes = plt.subplots(1, 3, figsize=(9, 3))
    for ax, im, title in zip(axes, (img.data, a_img, b_img), ("input", "A codes", "B codes")):
        ax.imshow(im, cmap="gray")
        ax.set_title(title)
        ax.axis("off")
    fig.savefig("feature_images.png", dpi=100)
except ImportError:
    pass
