"""Pipeline orchestration, file output, plots and the command line."""

from .pipeline import (
    AnalysisReport,
    AnalyzeConfig,
    CorpusReport,
    analyze,
    analyze_detection_set,
    corpus_run,
    render_plots,
    write_corpus,
)

__all__ = [
    "AnalysisReport",
    "AnalyzeConfig",
    "CorpusReport",
    "analyze",
    "analyze_detection_set",
    "corpus_run",
    "render_plots",
    "write_corpus",
]
