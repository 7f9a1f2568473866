"""Dataset renovation: noisy-label and missing-label detection for
image-classification test sets.

Predictions from heterogeneous methods (vision-language models,
statistical label-noise detectors, the dataset's own labels) are voted
into pseudo ground truth, each method's expertise is estimated with an
over-prediction penalty, and expertise-weighted support scores are
filtered and softmax-normalized into per-image soft labels with a
clean / noisy / missing diagnosis. A local review service closes the loop
with human verdicts that feed back into the expertise estimates.
"""

__version__ = "0.1.0"
