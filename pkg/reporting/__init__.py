"""
Text reports for construction counts and verified designs.
"""

from .summary import DesignReport, counts_frame, summary_report

__all__ = ['DesignReport', 'counts_frame', 'summary_report']
