"""Training and export for compact anchor-free detectors.

Consumes YOLO-layout datasets (data.yaml manifest + label txt files) and
produces TorchScript bundles with a metadata JSON that the detection
toolkit's CLI loads directly.
"""

__version__ = "0.1.0"
