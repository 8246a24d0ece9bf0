// Report view model: the nine sections in canonical order, with a "missing"
// marker for any empty section (a server bug we surface rather than hide).
// The plain-text rendering must match the server's text endpoint byte for
// byte so the copy action is faithful.

export type ReportSection = {
  field: string;
  tag: string;
  label: string;
};

export const SECTIONS: ReportSection[] = [
  { field: "report_number", tag: "[REPORT_NUMBER]", label: "报告编号" },
  { field: "consultation_date", tag: "[CONSULTATION_DATE]", label: "咨询日期" },
  { field: "client", tag: "[CLIENT]", label: "委托人" },
  { field: "subject", tag: "[SUBJECT]", label: "咨询事项" },
  { field: "purpose", tag: "[PURPOSE]", label: "咨询目的" },
  { field: "facts_and_background", tag: "[FACTS_AND_BACKGROUND]", label: "事实与背景" },
  { field: "legal_analysis", tag: "[LEGAL_ANALYSIS]", label: "法律分析" },
  { field: "legal_advice", tag: "[LEGAL_ADVICE]", label: "法律建议" },
  { field: "risk_warnings", tag: "[RISK_WARNINGS]", label: "风险提示" },
];

export type ReportBlock = {
  field: string;
  tag: string;
  label: string;
  text: string;
  missing: boolean;
};

export function renderReport(report: Record<string, string>): ReportBlock[] {
  return SECTIONS.map((section) => {
    const text = report[section.field] ?? "";
    return {
      ...section,
      text,
      missing: text.trim().length === 0,
    };
  });
}

/** Plain-text rendering identical to the server's report.txt endpoint. */
export function reportText(report: Record<string, string>): string {
  const lines: string[] = [];
  for (const section of SECTIONS) {
    lines.push(`${section.tag} ${section.label}`);
    lines.push(report[section.field] ?? "");
    lines.push("");
  }
  return lines.join("\n").replace(/\s+$/, "") + "\n";
}
