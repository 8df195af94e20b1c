#include "stiffstep/report.hpp"

#include <gtest/gtest.h>

#include <cmath>
#include <sstream>

using namespace stiffstep;

namespace {

std::vector<ConvergenceRow> sample_rows() {
    ConvergenceRow a;
    a.dt = 321.8122 / 643;
    a.error_l2 = 6.697969115862E-08;
    a.error_linf = 5.5e-8;
    a.avg_newton_iters = 3.25;
    ConvergenceRow b = a;
    b.dt = a.dt / 2;
    b.error_l2 = 4.145569039958E-09;
    b.order_l2 = 4.0140816724;
    b.order_linf = 15.55;
    ConvergenceRow c = b;
    c.failed = true;
    c.error_l2 = c.error_linf = std::nan("");
    c.order_l2.reset();
    c.order_linf.reset();
    return {a, b, c};
}

std::vector<std::string> split(const std::string& s, char sep) {
    std::vector<std::string> out;
    std::string cur;
    for (char ch : s) {
        if (ch == sep) {
            out.push_back(cur);
            cur.clear();
        } else {
            cur += ch;
        }
    }
    out.push_back(cur);
    return out;
}

std::string trim(const std::string& s) {
    const auto b = s.find_first_not_of(' ');
    if (b == std::string::npos) return "";
    return s.substr(b, s.find_last_not_of(' ') - b + 1);
}

}  // namespace

TEST(Report, CellFormats) {
    EXPECT_EQ(format_sci(6.697969115862E-08), "6.69796911586E-08");
    EXPECT_EQ(format_dt(321.8122 / 643), "5.0048554E-01");
    EXPECT_EQ(format_dt(1.0), "1.0000000E+00");
    EXPECT_EQ(format_order(4.0140816724, false), "4.0140816724");
    EXPECT_EQ(format_order(std::nullopt, true), "");
    EXPECT_EQ(format_order(std::nullopt, false), "***");
    EXPECT_EQ(format_order(15.55, false), "***");
    EXPECT_EQ(format_order(std::nan(""), false), "***");
    EXPECT_EQ(format_sci(std::nan("")), "***");
}

TEST(Report, CsvLayout) {
    std::ostringstream os;
    write_convergence_csv(os, sample_rows());
    const auto lines = split(os.str(), '\n');
    EXPECT_EQ(lines[0], "dt,error_l2,order_l2,error_linf,order_linf,avg_newton_iters");
    EXPECT_EQ(lines[1], "5.0048554E-01,6.69796911586E-08,,5.50000000000E-08,,3.25");
    EXPECT_EQ(lines[2], "2.5024277E-01,4.14556903996E-09,4.0140816724,5.50000000000E-08,***,3.25");
    EXPECT_EQ(lines[3], "2.5024277E-01,***,***,***,***,***");
}

TEST(Report, MarkdownCarriesSameCells) {
    const auto rows = sample_rows();
    std::ostringstream csv, md;
    write_convergence_csv(csv, rows);
    write_convergence_markdown(md, rows, "caption");
    const auto csv_lines = split(csv.str(), '\n');
    const auto md_lines = split(md.str(), '\n');
    EXPECT_EQ(md_lines[0], "caption");
    EXPECT_EQ(md_lines[3], "|---|---|---|---|---|---|");
    for (std::size_t r = 0; r < rows.size(); ++r) {
        const auto csv_cells = split(csv_lines[r + 1], ',');
        auto md_cells = split(md_lines[r + 4], '|');
        md_cells = {md_cells.begin() + 1, md_cells.end() - 1};
        ASSERT_EQ(md_cells.size(), csv_cells.size());
        for (std::size_t i = 0; i < csv_cells.size(); ++i) EXPECT_EQ(trim(md_cells[i]), csv_cells[i]);
    }
}

TEST(Report, ScanCsv) {
    StabilityScanResult scan;
    scan.c_values = {0.0, 0.05};
    scan.max_abs_g = {1.5, 1.0};
    scan.valid_mask = {false, true};
    std::ostringstream os;
    write_scan_csv(os, scan);
    EXPECT_EQ(os.str(), "c,max_abs_g,valid\n0.000000000000E+00,1.500000000000E+00,0\n"
                        "5.000000000000E-02,1.000000000000E+00,1\n");
}
