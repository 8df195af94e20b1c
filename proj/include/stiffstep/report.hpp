#pragma once

// Table emission for convergence studies and stability scans.

#include "stiffstep/harness.hpp"
#include "stiffstep/stability.hpp"

#include <cmath>
#include <cstdio>
#include <optional>
#include <ostream>
#include <string>
#include <vector>

namespace stiffstep {

/// Cell shown for missing or non-finite values and for absurd orders.
inline constexpr const char* kMissingCell = "***";

/// Orders at or beyond this magnitude do not fit the order column and are
/// shown as kMissingCell.
inline constexpr double kAbsurdOrder = 10.0;

/// Scientific notation with `digits` significant digits, e.g. 6.69796911586E-08.
[[nodiscard]] inline std::string format_sci(double x, int digits = 12) {
    if (!std::isfinite(x)) return kMissingCell;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*E", digits - 1, x);
    return buf;
}

/// dt cells use 8 significant digits so effective steps such as
/// 321.8122/643 print as 5.0048554E-01.
[[nodiscard]] inline std::string format_dt(double dt) { return format_sci(dt, 8); }

[[nodiscard]] inline std::string format_order(const std::optional<double>& order, bool first_row) {
    if (first_row) return "";
    if (!order || !std::isfinite(*order) || std::abs(*order) >= kAbsurdOrder) return kMissingCell;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.10f", *order);
    return buf;
}

[[nodiscard]] inline std::string format_fixed(double x, int decimals) {
    if (!std::isfinite(x)) return kMissingCell;
    char buf[64];
    std::snprintf(buf, sizeof buf, "%.*f", decimals, x);
    return buf;
}

/// dt, error_l2, order_l2, error_linf, order_linf, avg_newton_iters
[[nodiscard]] inline std::vector<std::string> row_cells(const ConvergenceRow& row, bool first_row) {
    return {format_dt(row.dt),
            format_sci(row.error_l2),
            format_order(row.order_l2, first_row),
            format_sci(row.error_linf),
            format_order(row.order_linf, first_row),
            row.failed ? std::string(kMissingCell) : format_fixed(row.avg_newton_iters, 2)};
}

inline const std::vector<std::string>& convergence_columns() {
    static const std::vector<std::string> cols = {"dt",         "error_l2",   "order_l2",
                                                  "error_linf", "order_linf", "avg_newton_iters"};
    return cols;
}

inline void write_convergence_csv(std::ostream& out, const std::vector<ConvergenceRow>& rows) {
    const auto& cols = convergence_columns();
    for (std::size_t i = 0; i < cols.size(); ++i) out << (i ? "," : "") << cols[i];
    out << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto cells = row_cells(rows[r], r == 0);
        for (std::size_t i = 0; i < cells.size(); ++i) out << (i ? "," : "") << cells[i];
        out << '\n';
    }
}

inline void write_convergence_markdown(std::ostream& out, const std::vector<ConvergenceRow>& rows,
                                       const std::string& caption = {}) {
    if (!caption.empty()) out << caption << "\n\n";
    const auto& cols = convergence_columns();
    out << '|';
    for (const auto& c : cols) out << ' ' << c << " |";
    out << "\n|";
    for (std::size_t i = 0; i < cols.size(); ++i) out << "---|";
    out << '\n';
    for (std::size_t r = 0; r < rows.size(); ++r) {
        out << '|';
        for (const auto& cell : row_cells(rows[r], r == 0)) out << ' ' << cell << " |";
        out << '\n';
    }
}

inline void write_scan_csv(std::ostream& out, const StabilityScanResult& scan) {
    out << "c,max_abs_g,valid\n";
    for (std::size_t i = 0; i < scan.c_values.size(); ++i) {
        char buf[96];
        std::snprintf(buf, sizeof buf, "%.12E,%.12E,%d\n", scan.c_values[i], scan.max_abs_g[i],
                      scan.valid_mask[i] ? 1 : 0);
        out << buf;
    }
}

}  // namespace stiffstep
