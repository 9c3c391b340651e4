"""HTTP service wrapping the core pipeline, plus its request/response models."""
