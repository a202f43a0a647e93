#define DOCTEST_CONFIG_IMPLEMENT_WITH_MAIN
#include <doctest.h>

#include <cmath>
#include <cstdio>
#include <filesystem>
#include <fstream>
#include <limits>
#include <string>

#include "tailsim/csv_io.hpp"
#include "tailsim/errors.hpp"
#include "tailsim/estimation.hpp"
#include "tailsim/svg_plot.hpp"

using namespace tailsim;
namespace fs = std::filesystem;

namespace {

std::string slurp(const fs::path& p) {
    std::ifstream in(p, std::ios::binary);
    REQUIRE(in.good());
    return std::string(std::istreambuf_iterator<char>(in),
                       std::istreambuf_iterator<char>());
}

fs::path temp_dir() {
    const fs::path dir =
        fs::temp_directory_path() / "tailsim_csv_test" /
        std::to_string(reinterpret_cast<std::uintptr_t>(&slurp));
    fs::create_directories(dir);
    return dir;
}

}  // namespace

TEST_CASE("format_double round-trips and canonicalizes special values") {
    CHECK(format_double(0.0) == "0");
    CHECK(format_double(2.0) == "2");
    CHECK(format_double(0.1) == "0.10000000000000001");
    CHECK(std::stod(format_double(0.1)) == 0.1);
    // stod raises out_of_range for subnormals, so go through strtod
    const double tiny = 4.9406564584124654e-324;
    CHECK(std::strtod(format_double(tiny).c_str(), nullptr) == tiny);
    CHECK(format_double(std::numeric_limits<double>::quiet_NaN()) == "nan");
    CHECK(format_double(std::numeric_limits<double>::infinity()) == "inf");
    CHECK(format_double(-std::numeric_limits<double>::infinity()) == "-inf");
    CHECK(format_double(-0.0) == "-0");
}

TEST_CASE("tail curve csv has the fixed header and exact cells") {
    TailCurve curve = tail_curve_from_counts({1.0, 2.0}, 8, {4, 1});
    curve.theory = {0.5, std::numeric_limits<double>::quiet_NaN()};
    curve.theory_lo = {0.25, 0.0};
    curve.theory_hi = {0.5, 0.125};
    curve.regime = "GeneralBounds";
    const std::string text = tail_curve_csv(curve, "demo", 42);

    CHECK(text.rfind("# scenario=demo seed=42\n", 0) == 0);
    CHECK(text.find("u,n_samples,count,p_hat,ci_lo,ci_hi,theory,theory_lo,"
                    "theory_hi,ratio\n") != std::string::npos);
    // p_hat = 4/8 exactly, ratio = 0.5/0.5 = 1; the NaN theory row must
    // propagate into a nan ratio, not an empty cell.
    CHECK(text.find("1,8,4,0.5,") != std::string::npos);
    CHECK(text.find(",0.5,0.25,0.5,1\n") != std::string::npos);
    CHECK(text.find(",nan,0,0.125,nan\n") != std::string::npos);

    // byte determinism
    CHECK(text == tail_curve_csv(curve, "demo", 42));
}

TEST_CASE("prediction csv carries the caller's regime label") {
    TailPrediction p;
    p.point = 0.25;
    p.lower = 0.25;
    p.upper = 0.25;
    const std::string text = prediction_csv({3.0}, {p}, "SupWalk", "s", 7);
    CHECK(text.find("u,prediction,lower,upper,regime\n") != std::string::npos);
    CHECK(text.find("3,0.25,0.25,0.25,SupWalk\n") != std::string::npos);
    // a sandwich regime with no point value prints nan
    TailPrediction q;
    q.point.reset();
    q.lower = 0.0;
    q.upper = 0.5;
    const std::string text2 =
        prediction_csv({1.0}, {q}, "GeneralBounds", "s", 7);
    CHECK(text2.find("1,nan,0,0.5,GeneralBounds\n") != std::string::npos);
}

TEST_CASE("diag and trajectory and enumeration tables") {
    const std::string diag =
        diag_rows_csv({{1.0, 2.0, 0.5, 1.0, "ok"}}, "d", 3);
    CHECK(diag.find("x,y,value,bound,verdict\n") != std::string::npos);
    CHECK(diag.find("1,2,0.5,1,ok\n") != std::string::npos);

    const std::string traj = trajectory_csv({{0, 1, 0.5}, {1, -1, 2.0}}, "t", 9);
    CHECK(traj.find("step,sign,log_mag\n") != std::string::npos);
    CHECK(traj.find("0,1,0.5\n") != std::string::npos);
    CHECK(traj.find("1,-1,2\n") != std::string::npos);

    const std::string en = enumeration_csv({0.0, 1.5}, {0.25, 0.75}, "e");
    CHECK(en.find("value,probability\n") != std::string::npos);
    CHECK(en.find("0,0.25\n") != std::string::npos);
    CHECK(en.find("1.5,0.75\n") != std::string::npos);

    CHECK_THROWS_AS(enumeration_csv({0.0}, {0.25, 0.75}, "e"), DomainError);
}

TEST_CASE("atomic writer creates parents and leaves no temp files") {
    const fs::path dir = temp_dir();
    const fs::path target = dir / "nested" / "deep" / "out.csv";
    fs::remove_all(dir / "nested");
    write_text_atomic(target, "a,b\n1,2\n");
    CHECK(slurp(target) == "a,b\n1,2\n");

    // overwrite must fully replace the old content
    write_text_atomic(target, "x\n");
    CHECK(slurp(target) == "x\n");

    std::size_t entries = 0;
    for (const auto& e : fs::directory_iterator(target.parent_path())) {
        (void)e;
        ++entries;
    }
    CHECK(entries == 1);  // no .tmp residue
    fs::remove_all(dir);
}

TEST_CASE("atomic writer reports unwritable destinations") {
    CHECK_THROWS_AS(write_text_atomic("/proc/definitely/not/writable/x.csv", "y"),
                    IoError);
}

TEST_CASE("svg renderer is deterministic and rejects empty input") {
    PlotSeries s;
    s.label = "curve";
    s.xs = {1.0, 2.0, 3.0};
    s.ys = {0.1, 0.01, 0.001};
    s.y_lo = {0.05, 0.005, 0.0005};
    s.y_hi = {0.2, 0.02, 0.002};
    PlotBand band;
    band.label = "band";
    band.xs = s.xs;
    band.lo = {0.04, 0.004, 0.0004};
    band.hi = {0.4, 0.04, 0.004};
    PlotOptions opts;
    opts.title = "tail";
    opts.x_label = "u";
    opts.y_label = "p";
    const std::string svg = render_plot({s}, {band}, opts);
    CHECK(svg.rfind("<svg", 0) == 0);
    CHECK(svg.find("</svg>") != std::string::npos);
    CHECK(svg.find("tail") != std::string::npos);
    CHECK(svg == render_plot({s}, {band}, opts));

    // log axis drops nonpositive points; an all-zero series has nothing left
    PlotSeries zero;
    zero.xs = {1.0};
    zero.ys = {0.0};
    CHECK_THROWS_AS(render_plot({zero}, {}, opts), DomainError);
}
