# -*- coding: utf-8 -*-
"""
Human-readable summaries for the spinframe CLI.
Summaries go to standard output; logs go to standard error.
"""

from typing import Any, Dict, List
import logging

from src.cli.commands import CommandResult


class SummaryRenderer:
    """
    Renders command results and errors as short plain-text summaries.
    """

    def __init__(self):
        """Initialize summary renderer."""
        self.logger = logging.getLogger(__name__)

    def render(self, result: CommandResult) -> str:
        """
        Render a command result.

        Args:
            result: Result returned by JobCommands.run

        Returns:
            Multi-line summary
        """
        renderers = {
            'spectrum': self._render_spectrum,
            'framing': self._render_framing,
            'verify': self._render_verify,
            'export': self._render_export
        }
        lines = [f"spinframe {result.command}: {'PASSED' if result.passed else 'FAILED'}"]
        lines.extend(renderers[result.command](result.report))
        lines.extend(f"  wrote {path}" for path in result.files)
        return "\n".join(lines)

    def _render_spectrum(self, report: Dict[str, Any]) -> List[str]:
        lines = [f"  max residual      {report['max_residual']:.3e}",
                 f"  min |lambda|      {report['min_abs_eigenvalue']:.12g}",
                 f"  even clusters     {report['evenness']}",
                 "  clusters (lambda : multiplicity)"]
        lines.extend(f"    {c['lambda_mean']:+.12f} : {c['multiplicity']}" for c in report['clusters'])
        if 'oracle' in report:
            lines.append(f"  oracle deviation  {report['oracle']['max_deviation']:.3e}")
        if 'dense_oracle_max_deviation' in report:
            lines.append(f"  dense deviation   {report['dense_oracle_max_deviation']:.3e}")
        return lines

    def _render_framing(self, report: Dict[str, Any]) -> List[str]:
        framing = report['report']
        lines = [
            f"  source            {report['provenance'].get('path')}",
            f"  max |div|         {framing['max_divergence']:.3e}",
            f"  orthogonality     {framing['max_orthogonality_defect']:.3e}",
            f"  length spread     {framing['max_length_spread']:.3e}",
            f"  min g-length      {report['min_pointwise_norm']:.12g}",
            f"  degenerate        {framing['degenerate']}"
        ]
        lines.extend(f"  warning: {warning}" for warning in report['warnings'])
        return lines

    def _render_verify(self, report: Dict[str, Any]) -> List[str]:
        lines = []
        for name, check in sorted(report['checks'].items()):
            status = 'ok' if check['passed'] else 'FAIL'
            if 'skipped' in check:
                detail = f"skipped ({check['skipped']})"
            elif 'value' in check:
                detail = f"{check['value']}"
            else:
                detail = f"{check.get('multiplicities')}"
            lines.append(f"  {name:<26}{status:<6}{detail}")
        return lines

    def _render_export(self, report: Dict[str, Any]) -> List[str]:
        return [f"  bundles           {', '.join(report['bundles'])}"]

