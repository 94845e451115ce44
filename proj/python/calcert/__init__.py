"""Certified upper bounds on L1 calibration error.

Thin convenience layer over the compiled `_calcert` extension: certificates
come back as plain dicts, everything else passes through unchanged.
"""

import json

try:  # installed wheel: extension lives inside the package
    from . import _calcert as _ext
except ImportError:  # development build: extension on sys.path
    import _calcert as _ext

__version__ = _ext.__version__

bernstein_bound = _ext.bernstein_bound
dkw_bound = _ext.dkw_bound
ece = _ext.ece
perturb_scores = _ext.perturb_scores
sample_synthetic = _ext.sample_synthetic
sech_normalizer = _ext.sech_normalizer
true_ce = _ext.true_ce
tv_denoise = _ext.tv_denoise
tv_lambda = _ext.tv_lambda


def certify(
    scores,
    labels,
    method,
    *,
    delta=0.05,
    seed=0,
    folds=5,
    subsample=True,
    v_assumed=1.0,
    h=0.015625,
    lipschitz_L=1.0,
    threads=1,
):
    """Cross-fit certificate for ``method`` in {"tv", "nw", "lipschitz"}.

    Returns the report as a dict: bound, additive terms, diagnostics, and
    per-fold details.
    """
    return json.loads(
        _ext.certify_json(
            list(scores),
            list(labels),
            method,
            delta,
            seed,
            folds,
            subsample,
            v_assumed,
            h,
            lipschitz_L,
            threads,
        )
    )


__all__ = [
    "__version__",
    "bernstein_bound",
    "certify",
    "dkw_bound",
    "ece",
    "perturb_scores",
    "sample_synthetic",
    "sech_normalizer",
    "true_ce",
    "tv_denoise",
    "tv_lambda",
]
