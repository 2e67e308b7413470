"""CLI orchestration: manifests, batch evaluation, training, reports."""
