from __future__ import annotations

from datetime import datetime
from pathlib import Path
from typing import Any

from reportlab.lib import colors
from reportlab.lib.enums import TA_CENTER
from reportlab.lib.pagesizes import A4, landscape
from reportlab.lib.styles import ParagraphStyle, getSampleStyleSheet
from reportlab.lib.units import cm
from reportlab.pdfgen import canvas
from reportlab.platypus import Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from results import complex_list_from_json, float_from_json
from settings import APP_DIR

# Palette colori
_C_PRIMARY   = colors.HexColor('#1565C0')   # blu scuro intestazioni
_C_PRIMARY_L = colors.HexColor('#E3F2FD')   # azzurro chiarissimo sfondo metriche
_C_PRIMARY_B = colors.HexColor('#BBDEFB')   # bordo riga metriche
_C_ROW_ALT   = colors.HexColor('#F5F5F5')   # grigio zebra righe pari
_C_RISK_HDR  = colors.HexColor('#C62828')   # rosso: margine o Gram critici
_C_GRAY_LINE = colors.HexColor('#BDBDBD')
_C_HDR_TXT   = colors.white

# Layout landscape A4
_PAGE_LS  = landscape(A4)
_MARGIN   = 1.8 * cm
_USABLE_W = _PAGE_LS[0] - 2 * _MARGIN

# righe massime della traccia riportate in tabella
_MAX_TRACE_ROWS = 60


def _fmt_complex(z: complex) -> str:
    sign = "-" if z.imag < 0 else "+"
    return f"{z.real:.6f} {sign} {abs(z.imag):.6f}i"


class PDFReportGenerator:
    """Generatore di report PDF dei risultati di approssimazione.

    Layout A4 orizzontale: riga KPI, tabella parametri, traccia dell'obiettivo e start.
    """

    def __init__(self, output_dir: Path | str | None = None, title: str = "N-BEST KERNEL"):
        self.output_dir = Path(output_dir) if output_dir else APP_DIR / "reports"
        self.output_dir.mkdir(parents=True, exist_ok=True)
        self.title = title
        self.styles = getSampleStyleSheet()
        self._setup_custom_styles()

    # ------------------------------------------------------------------ #
    #  Stili                                                               #
    # ------------------------------------------------------------------ #

    # nome -> (stile base, dimensione, colore, allineamento centrato, extra)
    _STYLE_TABLE: dict[str, tuple[str, int, Any, bool, dict[str, Any]]] = {
        'ReportTitle':   ('Heading1', 20, _C_PRIMARY, True, {'spaceAfter': 4, 'leading': 24}),
        'ReportSub':     ('Normal', 10, colors.HexColor('#455A64'), True, {'spaceAfter': 14}),
        'Section':       ('Heading2', 12, _C_PRIMARY, False, {'spaceBefore': 12, 'spaceAfter': 5}),
        'MetricValue':   ('Normal', 17, _C_PRIMARY, True, {'leading': 21, 'spaceBefore': 3}),
        'MetricLabel':   ('Normal', 8, colors.HexColor('#607D8B'), True, {'spaceAfter': 3}),
        'Cell':          ('Normal', 8, colors.HexColor('#263238'), False, {'leading': 10}),
    }

    def _setup_custom_styles(self) -> None:
        for name, (parent, size, colour, centred, extra) in self._STYLE_TABLE.items():
            style = ParagraphStyle(name=name, parent=self.styles[parent], fontSize=size, textColor=colour, **extra)
            if centred:
                style.alignment = TA_CENTER
            self.styles.add(style)

    # ------------------------------------------------------------------ #
    #  Utility                                                             #
    # ------------------------------------------------------------------ #

    def _p(self, text: str, style_name: str = 'Cell') -> Paragraph:
        return Paragraph(str(text or ''), self.styles[style_name])

    def _on_page(self, c: canvas.Canvas, doc) -> None:
        """Banda superiore con titolo e data, numero di pagina in basso."""
        w, h = doc.pagesize
        band = 1.5 * cm
        c.saveState()
        c.setFillColor(_C_PRIMARY_L)
        c.rect(0, h - band, w, band, fill=1, stroke=0)
        c.setStrokeColor(_C_PRIMARY)
        c.setLineWidth(1.2)
        c.line(_MARGIN, h - band, w - _MARGIN, h - band)

        c.setFillColor(_C_PRIMARY)
        c.setFont('Helvetica-Bold', 10)
        c.drawString(_MARGIN, h - band + 0.5 * cm, self.title)
        c.setFont('Helvetica', 8)
        stamp = datetime.now().strftime('%d/%m/%Y %H:%M')
        c.drawRightString(w - _MARGIN, h - band + 0.5 * cm, f"Creato il {stamp}")

        c.setStrokeColor(_C_GRAY_LINE)
        c.setLineWidth(0.4)
        c.line(_MARGIN, 1.3 * cm, w - _MARGIN, 1.3 * cm)
        c.setFillColor(colors.HexColor('#78909C'))
        c.drawCentredString(w / 2, 0.75 * cm, f"Pag. {doc.page}")
        c.restoreState()

    def _build_doc(self, output_path: Path) -> SimpleDocTemplate:
        return SimpleDocTemplate(str(output_path), pagesize=_PAGE_LS,
                                 leftMargin=_MARGIN, rightMargin=_MARGIN,
                                 topMargin=2.1 * cm, bottomMargin=1.9 * cm)

    def _table_style(self, risk: bool = False) -> TableStyle:
        """Intestazione colorata (rossa se `risk`) e righe alternate."""
        head = (0, 0), (-1, 0)
        body = (0, 1), (-1, -1)
        whole = (0, 0), (-1, -1)
        return TableStyle([
            ('BACKGROUND', *head, _C_RISK_HDR if risk else _C_PRIMARY),
            ('TEXTCOLOR', *head, _C_HDR_TXT),
            ('FONTNAME', *head, 'Helvetica-Bold'),
            ('FONTSIZE', *head, 9),
            ('FONTSIZE', *body, 8),
            ('TOPPADDING', *whole, 5),
            ('BOTTOMPADDING', *whole, 5),
            ('LEFTPADDING', *whole, 7),
            ('RIGHTPADDING', *whole, 7),
            ('ROWBACKGROUNDS', *body, [colors.white, _C_ROW_ALT]),
            ('LINEBELOW', *whole, 0.3, _C_GRAY_LINE),
            ('BOX', *whole, 0.4, _C_GRAY_LINE),
            ('VALIGN', *whole, 'TOP'),
        ])

    def _metrics_row(self, metrics: list[tuple[str, str]]) -> Table:
        """Una cella per metrica: valore grande sopra, etichetta sotto."""
        cells = [[self._p(value, 'MetricValue'), self._p(label, 'MetricLabel')] for label, value in metrics]
        table = Table([cells], colWidths=[_USABLE_W / len(metrics)] * len(metrics))
        table.setStyle(TableStyle([
            ('BACKGROUND', (0, 0), (-1, -1), _C_PRIMARY_L),
            ('BOX', (0, 0), (-1, -1), 0.8, _C_PRIMARY_B),
            ('INNERGRID', (0, 0), (-1, -1), 0.4, _C_PRIMARY_B),
            ('VALIGN', (0, 0), (-1, -1), 'MIDDLE'),
            ('TOPPADDING', (0, 0), (-1, -1), 10),
            ('BOTTOMPADDING', (0, 0), (-1, -1), 10),
        ]))
        return table

    def _section_header(self, title: str) -> Paragraph:
        return Paragraph(title, self.styles['Section'])

    # ------------------------------------------------------------------ #
    #  Report risultato                                                   #
    # ------------------------------------------------------------------ #

    def _parameter_rows(self, result: dict[str, Any]) -> list[list[Any]]:
        rows: list[list[Any]] = [["#", "Parametro a_k", "|a_k|", "Molteplicita'", "Coefficiente c_k"]]
        params = complex_list_from_json(result.get("parameters", []), "result.parameters")
        mults = result.get("multiplicities", [1] * len(params))
        if not isinstance(mults, list):
            raise ValueError("result.multiplicities: attesa una lista.")
        coeffs = complex_list_from_json(result.get("coefficients", []), "result.coefficients")
        for k, (a, m, c) in enumerate(zip(params, mults, coeffs), start=1):
            rows.append([str(k), self._p(_fmt_complex(a)), f"{abs(a):.6f}", str(m), self._p(_fmt_complex(c))])
        return rows

    def _trace_rows(self, trace: list[float]) -> list[list[str]]:
        rows = [["Passo", "Obiettivo A(f; a)"]]
        shown = trace if len(trace) <= _MAX_TRACE_ROWS else trace[: _MAX_TRACE_ROWS - 1] + trace[-1:]
        for k, value in enumerate(shown):
            step = k if len(trace) <= _MAX_TRACE_ROWS or k < _MAX_TRACE_ROWS - 1 else len(trace) - 1
            rows.append([str(step), f"{float(value):.6e}"])
        return rows

    def _start_rows(self, starts: list[dict[str, Any]]) -> list[list[Any]]:
        rows: list[list[Any]] = [["Start", "Tipo", "Obiettivo iniziale", "Obiettivo finale", "Cicli", "Note"]]
        for s in starts:
            final = s.get("objective")
            initial = s.get("initial_objective")
            rows.append([
                str(s.get("index", "")),
                str(s.get("kind", "")),
                f"{initial:.6e}" if isinstance(initial, (int, float)) else "-",
                f"{final:.6e}" if isinstance(final, (int, float)) else "-",
                str(s.get("cycles") if s.get("cycles") is not None else "-"),
                self._p(s.get("error") or ""),
            ])
        return rows

    def generate_result_report(self, data: dict[str, Any], filename: str | None = None) -> Path:
        """Report di un documento JSON prodotto dalla riga di comando."""
        result = data.get("result")
        if not isinstance(result, dict):
            raise ValueError("result: sezione mancante nel documento.")
        space = data.get("space") or {}
        diagnostics = result.get("diagnostics") or {}
        if not isinstance(space, dict) or not isinstance(diagnostics, dict):
            raise ValueError("space, result.diagnostics: attesi oggetti JSON.")
        method = str(diagnostics.get("method", "risultato"))

        output_path = Path(filename) if filename else self.output_dir / f"Report_{method}.pdf"
        output_path.parent.mkdir(parents=True, exist_ok=True)
        doc = self._build_doc(output_path)
        story: list[Any] = []

        story.append(Paragraph("Report Approssimazione", self.styles['ReportTitle']))
        kind = str(space.get("kind", "hardy"))
        subtitle = f"Spazio {kind}"
        if kind == "bergman":
            subtitle += f" (alpha = {space.get('alpha', 0.0)})"
        subtitle += f"  ›  N = {space.get('truncation', '-')}  ›  r_max = {space.get('rmax', '-')}  ›  metodo {method}"
        story.append(Paragraph(subtitle, self.styles['ReportSub']))

        margin = float_from_json(result.get("interior_margin", 0.0), "result.interior_margin")
        gram = float_from_json(result.get("gram_min_eig", 0.0), "result.gram_min_eig")
        story.append(self._metrics_row([
            ("Residuo", f"{float_from_json(result.get('residual_norm', 0.0), 'result.residual_norm'):.3e}"),
            ("Margine interno", f"{margin:.4f}"),
            ("Autovalore min. Gram", f"{gram:.2e}"),
            ("Parametri", str(len(result.get("parameters", [])))),
        ]))
        story.append(Spacer(1, 0.6 * cm))

        story.append(self._section_header("Parametri e coefficienti"))
        param_table = Table(self._parameter_rows(result), colWidths=[1.2 * cm, 8 * cm, 3 * cm, 3 * cm, 8 * cm],
                            repeatRows=1)
        param_table.setStyle(self._table_style(risk=margin <= 0.0 or gram <= 0.0))
        story.append(param_table)

        trace_raw = result.get("objective_trace") or []
        if not isinstance(trace_raw, list):
            raise ValueError("result.objective_trace: attesa una lista.")
        trace = [float_from_json(v, "result.objective_trace") for v in trace_raw]
        if trace:
            story.append(self._section_header("Traccia dell'obiettivo"))
            trace_table = Table(self._trace_rows(trace), colWidths=[3 * cm, 6 * cm], repeatRows=1, hAlign='LEFT')
            trace_table.setStyle(self._table_style())
            story.append(trace_table)

        raw_starts = diagnostics.get("starts")
        starts = [s for s in raw_starts if isinstance(s, dict)] if isinstance(raw_starts, list) else []
        if starts:
            story.append(self._section_header("Start del solutore multi-start"))
            start_table = Table(self._start_rows(starts),
                                colWidths=[1.6 * cm, 2.4 * cm, 4 * cm, 4 * cm, 2 * cm, 10 * cm], repeatRows=1)
            start_table.setStyle(self._table_style())
            story.append(start_table)

        doc.build(story, onFirstPage=self._on_page, onLaterPages=self._on_page)
        return output_path
