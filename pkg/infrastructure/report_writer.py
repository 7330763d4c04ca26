"""
Dashboard CSVs, charts and the experiment PDF for one run directory.

Layout:
  <run>/dashboard/*.csv
  <run>/dashboard/images/*.png
  <run>/reports/EXPERIMENT_REPORT.pdf
"""
from __future__ import annotations

from datetime import datetime, timezone
from pathlib import Path
from typing import Iterable, Mapping, Sequence

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import pandas as pd
import seaborn as sns
from reportlab.lib import colors
from reportlab.lib.pagesizes import A4
from reportlab.lib.styles import getSampleStyleSheet
from reportlab.lib.units import cm
from reportlab.platypus import Image, PageBreak, Paragraph, SimpleDocTemplate, Spacer, Table, TableStyle

from domain.evaluation.campaign import AttackRecord, AttackReport
from domain.evaluation.metrics import DetectionReport

ATTACK_COLUMNS = [
    "id", "payload", "mode", "succeeded", "gamma_used",
    "reembeds", "phi_before", "phi_after", "seconds",
]
DETECTION_COLUMNS = ["classifier", "p_fa", "p_md", "p_e", "accuracy", "n_cover", "n_stego"]

PDF_NAME = "EXPERIMENT_REPORT.pdf"


def utc_now_str() -> str:
    return datetime.now(timezone.utc).strftime("%Y-%m-%d %H:%M:%SZ")


def write_frame(df: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    df.to_csv(path, index=False)
    return path


def attack_frame(records: Sequence[AttackRecord]) -> pd.DataFrame:
    """Rows sorted by image id so the file does not depend on completion order."""
    rows = sorted((r.as_row() for r in records), key=lambda row: row["id"])
    return pd.DataFrame(rows, columns=ATTACK_COLUMNS)


def write_attack_csv(records: Sequence[AttackRecord], path: Path) -> Path:
    return write_frame(attack_frame(records), path)


def detection_frame(reports: Mapping[str, DetectionReport]) -> pd.DataFrame:
    rows = [{"classifier": name, **report.as_row()} for name, report in reports.items()]
    return pd.DataFrame(rows, columns=DETECTION_COLUMNS)


def write_detection_csv(reports: Mapping[str, DetectionReport], path: Path) -> Path:
    return write_frame(detection_frame(reports), path)


def gamma_cdf_frame(curve: Iterable[tuple[float, float]]) -> pd.DataFrame:
    return pd.DataFrame(
        [(round(g, 10), pct) for g, pct in curve], columns=["gamma", "cumulative_success_pct"]
    )


def reembed_frame(report: AttackReport) -> pd.DataFrame:
    return pd.DataFrame(sorted(report.reembed_counts.items()), columns=["reembeds", "images"])


def summary_frame(report: AttackReport, extra: Mapping[str, object] | None = None) -> pd.DataFrame:
    row = {
        "total": report.total,
        "succeeded": report.succeeded,
        "success_pct": report.success_percent,
        "min_seconds": report.min_seconds,
        "max_seconds": report.max_seconds,
        "mean_seconds": report.mean_seconds,
    }
    row.update(extra or {})
    return pd.DataFrame([row])


def plot_gamma_cdf(curve: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    sns.set(style="whitegrid")
    plt.figure(figsize=(8, 5))
    sns.lineplot(data=curve, x="gamma", y="cumulative_success_pct", drawstyle="steps-post")
    plt.ylim(0, 100)
    plt.title("Cumulative fooling success by adversarial intensity")
    plt.xlabel("gamma")
    plt.ylabel("Cumulative success (%)")
    plt.tight_layout()
    plt.savefig(path)
    plt.close()
    return path


def plot_reembeds(counts: pd.DataFrame, path: Path) -> Path:
    path.parent.mkdir(parents=True, exist_ok=True)
    sns.set(style="whitegrid")
    plt.figure(figsize=(8, 5))
    sns.barplot(data=counts, x="reembeds", y="images", color="#1f77b4")
    plt.title("Re-embeddings per attacked image")
    plt.xlabel("Re-embeddings")
    plt.ylabel("Images")
    plt.tight_layout()
    plt.savefig(path)
    plt.close()
    return path


def df_to_table(df: pd.DataFrame, max_rows: int = 25) -> Table:
    show = df.head(max_rows).copy()
    for col in show.select_dtypes("float").columns:
        show[col] = show[col].map(lambda v: f"{v:.4f}")
    t = Table([list(show.columns)] + show.values.tolist(), repeatRows=1)
    t.setStyle(
        TableStyle(
            [
                ("BACKGROUND", (0, 0), (-1, 0), colors.HexColor("#111827")),
                ("TEXTCOLOR", (0, 0), (-1, 0), colors.white),
                ("FONTNAME", (0, 0), (-1, 0), "Helvetica-Bold"),
                ("FONTSIZE", (0, 0), (-1, -1), 8),
                ("GRID", (0, 0), (-1, -1), 0.25, colors.HexColor("#E5E7EB")),
                ("ROWBACKGROUNDS", (0, 1), (-1, -1), [colors.white, colors.HexColor("#F9FAFB")]),
                ("VALIGN", (0, 0), (-1, -1), "MIDDLE"),
            ]
        )
    )
    return t


def scaled_image(path: Path, max_w: float, max_h: float) -> Image:
    img = Image(str(path))
    iw, ih = img.imageWidth, img.imageHeight
    if iw > 0 and ih > 0:
        scale = min(max_w / iw, max_h / ih)
        img.drawWidth = iw * scale
        img.drawHeight = ih * scale
    return img


def build_experiment_pdf(
    run_dir: Path,
    sections: Mapping[str, pd.DataFrame],
    gates: Mapping[str, bool],
    settings: Mapping[str, object],
) -> Path:
    """One page of settings and gates, one table per section, then every chart."""
    reports_dir = run_dir / "reports"
    reports_dir.mkdir(parents=True, exist_ok=True)
    pdf_path = reports_dir / PDF_NAME

    styles = getSampleStyleSheet()
    h1, h2, body = styles["Heading1"], styles["Heading2"], styles["BodyText"]
    doc = SimpleDocTemplate(
        str(pdf_path),
        pagesize=A4,
        leftMargin=2 * cm,
        rightMargin=2 * cm,
        topMargin=2 * cm,
        bottomMargin=2 * cm,
        title="ITE-SYN Experiment Report",
        author="ite-syn-lab",
    )

    story = [
        Paragraph("ITE-SYN Experiment Report", h1),
        Spacer(1, 0.3 * cm),
        Paragraph(f"Generated (UTC): {utc_now_str()}", body),
        Paragraph(f"Run directory: {run_dir}", body),
        Spacer(1, 0.4 * cm),
        Paragraph("Gates", h2),
    ]
    for name, passed in gates.items():
        story.append(Paragraph(f"{'PASS' if passed else 'FAIL'}: {name}", body))
    story.append(Spacer(1, 0.4 * cm))
    story.append(Paragraph("Settings", h2))
    story.append(df_to_table(pd.DataFrame(
        [(k, str(v)) for k, v in settings.items()], columns=["key", "value"]
    ), max_rows=60))
    story.append(PageBreak())

    for title, df in sections.items():
        story.append(Paragraph(title, h2))
        story.append(Spacer(1, 0.2 * cm))
        if df.empty:
            story.append(Paragraph("No rows.", body))
        else:
            story.append(df_to_table(df))
        story.append(Spacer(1, 0.5 * cm))

    pngs = sorted((run_dir / "dashboard" / "images").glob("*.png"))
    if pngs:
        page_w, page_h = A4
        usable_w = page_w - doc.leftMargin - doc.rightMargin
        usable_h = page_h - doc.topMargin - doc.bottomMargin
        for png in pngs:
            story.append(PageBreak())
            story.append(Paragraph(png.stem.replace("_", " "), h2))
            story.append(scaled_image(png, usable_w, usable_h - 4 * cm))

    doc.build(story)
    return pdf_path
