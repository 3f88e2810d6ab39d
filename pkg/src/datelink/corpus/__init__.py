"""Synthetic date images, dataset ingestion and splitting."""
from .datasets import (
    CSV_COLUMNS,
    Dataset,
    fit_image,
    generate_dataset,
    load_dataset,
    open_saved,
    random_label,
    save_dataset,
    split,
)
from .render import MONTH_NAMES, StyleParams, render_date, render_mosaic, render_text

__all__ = [
    "CSV_COLUMNS", "Dataset", "fit_image", "generate_dataset", "load_dataset", "open_saved",
    "random_label", "save_dataset", "split", "MONTH_NAMES", "StyleParams", "render_date",
    "render_mosaic", "render_text",
]
