#!/usr/bin/python

from setuptools import setup

setup(
    name="contrast-forensics",
    description="Estimate contrast-enhancement curves and localize inconsistently enhanced regions in grayscale images.",
    version="0.1.0",
    packages=["contrast_forensics"],
    python_requires=">=3.10",
    install_requires=[
        "ruamel.yaml>=0.15",
        "numpy>=1.23",
        "scipy>=1.9",
        "PyMaxflow>=1.3",
        "pypng>=0.20220715",
    ],
    entry_points={
        "console_scripts": [
            "contrast-forensics = contrast_forensics.cli:main",
            "cf-synth = contrast_forensics.synth:main",
            "cf-synth-composite = contrast_forensics.synth_composite:main",
            "cf-estimate-gamma = contrast_forensics.estimate_gamma:main",
            "cf-estimate-curve = contrast_forensics.estimate_curve:main",
            "cf-recover-hist = contrast_forensics.recover_hist:main",
            "cf-localize = contrast_forensics.localize:main",
            "cf-eval-gamma = contrast_forensics.eval_gamma:main",
            "cf-eval-curve = contrast_forensics.eval_curve:main",
            "cf-eval-localize = contrast_forensics.eval_localize:main",
            "cf-eval-empty-bins = contrast_forensics.eval_empty_bins:main",
        ]
    },
)
