#include "paraosc/scenario.hpp"

#include <algorithm>
#include <charconv>
#include <cmath>
#include <fstream>
#include <iomanip>
#include <ostream>
#include <set>
#include <sstream>

#include "paraosc/csv.hpp"
#include "paraosc/svg.hpp"

namespace paraosc {

using json = nlohmann::ordered_json;

namespace {

std::string fmt(double v) {
  std::ostringstream os;
  os.precision(6);
  os << v;
  return os.str();
}

[[noreturn]] void fail(const std::string& label, const std::string& what) {
  throw ConfigError(label + ": " + what);
}

const json& need(const json& j, const std::string& label, const std::string& path) {
  const auto key = path.find_last_of('.') == std::string::npos
                       ? path
                       : path.substr(path.find_last_of('.') + 1);
  if (!j.contains(key)) fail(label, "missing required field '" + path + "'");
  return j.at(key);
}

double as_number(const json& j, const std::string& label, const std::string& path) {
  if (!j.is_number()) fail(label, "field '" + path + "' must be a number");
  return j.get<double>();
}

std::vector<double> as_number_array(const json& j, const std::string& label,
                                    const std::string& path) {
  if (!j.is_array()) fail(label, "field '" + path + "' must be an array of numbers");
  std::vector<double> out;
  out.reserve(j.size());
  for (const auto& e : j) {
    if (!e.is_number()) fail(label, "field '" + path + "' must contain only numbers");
    out.push_back(e.get<double>());
  }
  return out;
}

Eigen::MatrixXd as_matrix(const json& j, const std::string& label, const std::string& path) {
  if (!j.is_array() || j.empty()) fail(label, "field '" + path + "' must be a matrix (array of rows)");
  const std::size_t rows = j.size();
  std::size_t cols = 0;
  Eigen::MatrixXd m;
  for (std::size_t r = 0; r < rows; ++r) {
    const auto row = as_number_array(j.at(r), label, path + "[" + std::to_string(r) + "]");
    if (r == 0) {
      cols = row.size();
      m.resize(static_cast<Eigen::Index>(rows), static_cast<Eigen::Index>(cols));
    } else if (row.size() != cols) {
      fail(label, "field '" + path + "' has ragged rows");
    }
    for (std::size_t c = 0; c < cols; ++c)
      m(static_cast<Eigen::Index>(r), static_cast<Eigen::Index>(c)) = row[c];
  }
  return m;
}

void check_keys(const json& j, const std::string& label, const std::string& where,
                const std::set<std::string>& known) {
  for (const auto& item : j.items())
    if (!known.count(item.key()))
      fail(label, "unrecognized field '" + (where.empty() ? "" : where + ".") + item.key() + "'");
}

Eigen::MatrixXcd as_complex_matrix(const json& j, const std::string& label,
                                   const std::string& path) {
  if (!j.is_object()) fail(label, "field '" + path + "' must be {\"real\": ..., \"imag\": ...}");
  check_keys(j, label, path, {"real", "imag"});
  const Eigen::MatrixXd re = as_matrix(need(j, label, path + ".real"), label, path + ".real");
  Eigen::MatrixXd im = Eigen::MatrixXd::Zero(re.rows(), re.cols());
  if (j.contains("imag")) {
    im = as_matrix(j.at("imag"), label, path + ".imag");
    if (im.rows() != re.rows() || im.cols() != re.cols())
      fail(label, "field '" + path + "': real and imag shapes differ");
  }
  Eigen::MatrixXcd m(re.rows(), re.cols());
  m.real() = re;
  m.imag() = im;
  return m;
}

Eigen::VectorXcd as_complex_vector(const json& j, const std::string& label,
                                   const std::string& path) {
  if (!j.is_object()) fail(label, "field '" + path + "' must be {\"real\": ..., \"imag\": ...}");
  check_keys(j, label, path, {"real", "imag"});
  const auto re = as_number_array(need(j, label, path + ".real"), label, path + ".real");
  std::vector<double> im(re.size(), 0.0);
  if (j.contains("imag")) {
    im = as_number_array(j.at("imag"), label, path + ".imag");
    if (im.size() != re.size()) fail(label, "field '" + path + "': real and imag sizes differ");
  }
  Eigen::VectorXcd v(static_cast<Eigen::Index>(re.size()));
  for (std::size_t i = 0; i < re.size(); ++i)
    v[static_cast<Eigen::Index>(i)] = Complex(re[i], im[i]);
  return v;
}

}  // namespace

Scenario parse_scenario(const json& config, const std::string& label) {
  if (!config.is_object()) fail(label, "top level must be a JSON object");
  check_keys(config, label, "",
             {"n_modes", "omegas", "hamiltonian", "state", "time", "outputs", "oracle"});

  Scenario sc;
  sc.raw = config;
  sc.label = label;

  if (config.contains("n_modes")) {
    const auto& jn = config.at("n_modes");
    if (!jn.is_number_integer() || jn.get<long>() < 1)
      fail(label, "field 'n_modes' must be a positive integer");
    sc.n_modes = jn.get<Eigen::Index>();
  }

  if (config.contains("omegas")) {
    const auto w = as_number_array(config.at("omegas"), label, "omegas");
    Eigen::VectorXd omegas(static_cast<Eigen::Index>(w.size()));
    for (std::size_t i = 0; i < w.size(); ++i) {
      if (!(w[i] > 0.0)) fail(label, "field 'omegas' entries must be > 0");
      omegas[static_cast<Eigen::Index>(i)] = w[i];
    }
    sc.omegas = omegas;
  }

  // hamiltonian: exactly one of preset / table / ladder
  const json& jham = need(config, label, "hamiltonian");
  if (!jham.is_object()) fail(label, "field 'hamiltonian' must be an object");
  check_keys(jham, label, "hamiltonian", {"preset", "params", "table", "ladder"});
  const int styles = static_cast<int>(jham.contains("preset")) +
                     static_cast<int>(jham.contains("table")) +
                     static_cast<int>(jham.contains("ladder"));
  if (styles != 1)
    fail(label, "field 'hamiltonian' must contain exactly one of 'preset', 'table', 'ladder'");

  if (jham.contains("preset")) {
    sc.ham_kind = "preset";
    if (!jham.at("preset").is_string())
      fail(label, "field 'hamiltonian.preset' must be a string");
    sc.preset_name = jham.at("preset").get<std::string>();
    if (jham.contains("params")) {
      const json& jp = jham.at("params");
      if (!jp.is_object()) fail(label, "field 'hamiltonian.params' must be an object");
      for (const auto& item : jp.items())
        sc.preset_params[item.key()] =
            as_number(item.value(), label, "hamiltonian.params." + item.key());
    }
  } else if (jham.contains("table")) {
    sc.ham_kind = "table";
    const json& jt = jham.at("table");
    if (!jt.is_object()) fail(label, "field 'hamiltonian.table' must be an object");
    check_keys(jt, label, "hamiltonian.table", {"times", "A", "B", "C"});
    TableSpec table;
    table.times = as_number_array(need(jt, label, "hamiltonian.table.times"), label,
                                  "hamiltonian.table.times");
    const json& jA = need(jt, label, "hamiltonian.table.A");
    if (!jA.is_array() || jA.size() != table.times.size())
      fail(label, "field 'hamiltonian.table.A' must hold one matrix per sample time");
    for (std::size_t k = 0; k < jA.size(); ++k)
      table.A.push_back(
          as_matrix(jA.at(k), label, "hamiltonian.table.A[" + std::to_string(k) + "]"));
    if (jt.contains("B")) {
      const json& jB = jt.at("B");
      if (!jB.is_array() || jB.size() != table.times.size())
        fail(label, "field 'hamiltonian.table.B' must hold one vector per sample time");
      for (std::size_t k = 0; k < jB.size(); ++k) {
        const auto b =
            as_number_array(jB.at(k), label, "hamiltonian.table.B[" + std::to_string(k) + "]");
        table.B.push_back(
            Eigen::Map<const Eigen::VectorXd>(b.data(), static_cast<Eigen::Index>(b.size())));
      }
    }
    if (jt.contains("C"))
      table.C = as_number_array(jt.at("C"), label, "hamiltonian.table.C");
    sc.table = std::move(table);
  } else {
    sc.ham_kind = "ladder";
    const json& jl = jham.at("ladder");
    if (!jl.is_object()) fail(label, "field 'hamiltonian.ladder' must be an object");
    check_keys(jl, label, "hamiltonian.ladder", {"lambda", "calA", "calB", "C"});
    LadderRepresentation rep;
    rep.calA = as_complex_matrix(need(jl, label, "hamiltonian.ladder.calA"), label,
                                 "hamiltonian.ladder.calA");
    if (rep.calA.rows() != rep.calA.cols() || rep.calA.rows() % 2 != 0 || rep.calA.rows() < 2)
      fail(label, "field 'hamiltonian.ladder.calA' must be a 2N x 2N matrix");
    rep.n_modes = rep.calA.rows() / 2;
    rep.calB = Eigen::VectorXcd::Zero(2 * rep.n_modes);
    if (jl.contains("calB")) {
      rep.calB = as_complex_vector(jl.at("calB"), label, "hamiltonian.ladder.calB");
      if (rep.calB.size() != 2 * rep.n_modes)
        fail(label, "field 'hamiltonian.ladder.calB' must have length 2N");
    }
    if (jl.contains("lambda"))
      rep.lambda = as_number(jl.at("lambda"), label, "hamiltonian.ladder.lambda");
    if (jl.contains("C")) rep.C = as_number(jl.at("C"), label, "hamiltonian.ladder.C");
    sc.ladder = std::move(rep);
  }

  if (config.contains("state")) {
    const json& js = config.at("state");
    if (!js.is_object()) fail(label, "field 'state' must be an object");
    check_keys(js, label, "state", {"type", "n", "alpha"});
    const json& jtype = need(js, label, "state.type");
    if (!jtype.is_string()) fail(label, "field 'state.type' must be a string");
    const std::string type = jtype.get<std::string>();
    if (type == "number") {
      const json& jn = need(js, label, "state.n");
      if (!jn.is_array()) fail(label, "field 'state.n' must be an array of integers");
      std::vector<long> n;
      for (const auto& e : jn) {
        if (!e.is_number_integer() || e.get<long>() < 0)
          fail(label, "field 'state.n' entries must be integers >= 0");
        n.push_back(e.get<long>());
      }
      sc.state = StateSpec::number(std::move(n));
    } else if (type == "coherent") {
      sc.state = StateSpec::coherent(
          as_complex_vector(need(js, label, "state.alpha"), label, "state.alpha"));
    } else {
      fail(label, "field 'state.type' must be 'number' or 'coherent'");
    }
  }

  const json& jtime = need(config, label, "time");
  if (!jtime.is_object()) fail(label, "field 'time' must be an object");
  check_keys(jtime, label, "time", {"t0", "t1", "dt"});
  sc.time.t0 = as_number(need(jtime, label, "time.t0"), label, "time.t0");
  sc.time.t1 = as_number(need(jtime, label, "time.t1"), label, "time.t1");
  sc.time.dt = as_number(need(jtime, label, "time.dt"), label, "time.dt");
  if (!(sc.time.dt > 0.0)) fail(label, "field 'time.dt' must be > 0");
  if (!(sc.time.t1 > sc.time.t0)) fail(label, "field 'time' requires t1 > t0");

  if (config.contains("outputs")) {
    const json& jo = config.at("outputs");
    if (!jo.is_array()) fail(label, "field 'outputs' must be an array of strings");
    static const std::set<std::string> kKnown{"moments", "propagator", "invariant_residuals",
                                              "classical"};
    sc.outputs.clear();
    for (const auto& e : jo) {
      if (!e.is_string() || !kKnown.count(e.get<std::string>()))
        fail(label,
             "field 'outputs' entries must be one of moments, propagator, "
             "invariant_residuals, classical");
      const auto name = e.get<std::string>();
      if (std::find(sc.outputs.begin(), sc.outputs.end(), name) == sc.outputs.end())
        sc.outputs.push_back(name);
    }
  }

  if (config.contains("oracle")) {
    const json& jo = config.at("oracle");
    if (!jo.is_object()) fail(label, "field 'oracle' must be an object");
    check_keys(jo, label, "oracle",
               {"cutoff", "dt_oracle", "tol", "certify_tol", "estimate_truncation"});
    sc.oracle.enabled = true;
    if (jo.contains("cutoff")) {
      if (!jo.at("cutoff").is_number_integer() || jo.at("cutoff").get<long>() < 2)
        fail(label, "field 'oracle.cutoff' must be an integer >= 2");
      sc.oracle.cutoff = jo.at("cutoff").get<Eigen::Index>();
    }
    if (jo.contains("dt_oracle"))
      sc.oracle.dt = as_number(jo.at("dt_oracle"), label, "oracle.dt_oracle");
    if (jo.contains("tol")) {
      sc.oracle.tolerance = as_number(jo.at("tol"), label, "oracle.tol");
      if (!(sc.oracle.tolerance > 0)) fail(label, "field 'oracle.tol' must be > 0");
    }
    if (jo.contains("certify_tol"))
      sc.oracle.certify_tol = as_number(jo.at("certify_tol"), label, "oracle.certify_tol");
    if (jo.contains("estimate_truncation")) {
      if (!jo.at("estimate_truncation").is_boolean())
        fail(label, "field 'oracle.estimate_truncation' must be a boolean");
      sc.oracle.estimate_truncation = jo.at("estimate_truncation").get<bool>();
    }
  }

  return sc;
}

Scenario load_scenario(const std::filesystem::path& path) {
  std::ifstream in(path, std::ios::binary);
  if (!in) throw ConfigError("cannot open scenario file '" + path.string() + "'");
  json config;
  try {
    config = json::parse(in);
  } catch (const json::parse_error& e) {
    throw ConfigError("scenario '" + path.string() + "': " + e.what());
  }
  return parse_scenario(config, path.filename().string());
}

Pipeline build_pipeline(const Scenario& sc, const RunOptions& opt) {
  const double t0 = sc.time.t0;
  const double t1 = opt.t_end_override.value_or(sc.time.t1);
  double dt = opt.dt_override.value_or(sc.time.dt);
  if (!(t1 > t0)) throw ConfigError(sc.label + ": require t1 > t0");

  auto make_schedule = [&]() -> HamiltonianSchedule {
    if (sc.ham_kind == "preset") return preset(sc.preset_name, sc.preset_params, t0, t1);
    if (sc.ham_kind == "table") {
      const TableSpec& tb = *sc.table;
      if (tb.A.empty() || tb.A[0].rows() % 2 != 0)
        throw ConfigError(sc.label + ": table A matrices must be 2N x 2N");
      const Eigen::Index n = tb.A[0].rows() / 2;
      std::vector<Eigen::VectorXd> B = tb.B;
      if (B.empty()) B.assign(tb.times.size(), Eigen::VectorXd::Zero(2 * n));
      std::vector<double> C = tb.C;
      if (C.empty()) C.assign(tb.times.size(), 0.0);
      return tabulated_schedule(n, tb.times, tb.A, B, C);
    }
    return from_ladder(*sc.ladder, t0, t1);
  };
  HamiltonianSchedule ham = make_schedule();

  if (sc.n_modes && *sc.n_modes != ham.n_modes())
    throw ConfigError(sc.label + ": n_modes (" + std::to_string(*sc.n_modes) +
                      ") does not match the hamiltonian (" + std::to_string(ham.n_modes()) +
                      " modes)");

  std::optional<ReferenceFrequencies> omegas;
  if (sc.omegas) {
    if (sc.omegas->size() != ham.n_modes())
      throw ConfigError(sc.label + ": 'omegas' must list one frequency per mode");
    omegas.emplace(*sc.omegas);
  } else {
    omegas = default_reference_frequencies(ham);
    if (!omegas)
      throw ConfigError(sc.label +
                        ": 'omegas' is required because A(t0) is not diagonal in the q and p "
                        "blocks");
  }

  StateSpec state = sc.state;
  if (state.kind == StateSpec::Kind::Number) {
    if (state.n.empty()) state.n.assign(static_cast<std::size_t>(ham.n_modes()), 0);
    if (static_cast<Eigen::Index>(state.n.size()) != ham.n_modes())
      throw ConfigError(sc.label + ": 'state.n' must list one occupation per mode");
  } else if (state.alpha.size() != ham.n_modes()) {
    throw ConfigError(sc.label + ": 'state.alpha' must list one amplitude per mode");
  }

  Pipeline pl{std::move(ham), std::move(*omegas), TimeGridSpec{t0, t1, dt}, std::move(state),
              false};
  if (!(dt > 0.0)) {
    pl.grid.dt = default_time_step(pl.omegas);
    pl.default_dt_used = true;
  }
  return pl;
}

std::uint64_t fnv1a64(const std::string& bytes) {
  std::uint64_t h = 1469598103934665603ULL;
  for (unsigned char b : bytes) {
    h ^= b;
    h *= 1099511628211ULL;
  }
  return h;
}

namespace {

std::string hash_hex(std::uint64_t h) {
  std::ostringstream os;
  os << "0x" << std::hex << std::setw(16) << std::setfill('0') << h;
  return os.str();
}

// Three-point derivative stencil; one-sided at ends and breakpoints.
struct Stencil {
  Eigen::Index idx[3];
  double w[3];
  int points = 0;
};

Stencil stencil_at(const Eigen::VectorXd& grid, Eigen::Index k, bool at_breakpoint) {
  const Eigen::Index last = grid.size() - 1;
  Stencil s;
  if (k > 0 && k < last && !at_breakpoint) {
    const double width = grid[k + 1] - grid[k - 1];
    s.points = 2;
    s.idx[0] = k + 1;
    s.w[0] = 1.0 / width;
    s.idx[1] = k - 1;
    s.w[1] = -1.0 / width;
    return s;
  }
  if (k + 2 <= last && (k < last)) {
    const double h = grid[k + 1] - grid[k];
    s.points = 3;
    s.idx[0] = k;
    s.w[0] = -1.5 / h;
    s.idx[1] = k + 1;
    s.w[1] = 2.0 / h;
    s.idx[2] = k + 2;
    s.w[2] = -0.5 / h;
    return s;
  }
  if (k - 2 >= 0) {
    const double h = grid[k] - grid[k - 1];
    s.points = 3;
    s.idx[0] = k;
    s.w[0] = 1.5 / h;
    s.idx[1] = k - 1;
    s.w[1] = -2.0 / h;
    s.idx[2] = k - 2;
    s.w[2] = 0.5 / h;
    return s;
  }
  // two-point fallback for very short grids
  s.points = 2;
  if (k < last) {
    const double h = grid[k + 1] - grid[k];
    s.idx[0] = k + 1;
    s.w[0] = 1.0 / h;
    s.idx[1] = k;
    s.w[1] = -1.0 / h;
  } else {
    const double h = grid[k] - grid[k - 1];
    s.idx[0] = k;
    s.w[0] = 1.0 / h;
    s.idx[1] = k - 1;
    s.w[1] = -1.0 / h;
  }
  return s;
}

}  // namespace

ResidualSeries build_residual_series(const SolutionRecord& rec, const QuadraticInvariant& quad,
                                     const Propagator& prop, const HamiltonianSchedule& ham) {
  const Eigen::Index n = rec.n_modes;
  const Eigen::Index m = rec.size();
  const SymplecticForm form = make_symplectic_form(n);
  const auto& bps = ham.breakpoints();
  const double span = rec.grid[m - 1] - rec.grid[0];

  ResidualSeries rs;
  rs.canonical.resize(m);
  rs.conjugacy.resize(m);
  rs.v_equation.resize(m);
  rs.u_equation.resize(m);
  rs.quadratic.resize(m);
  rs.heisenberg.resize(m);
  rs.z_symplectic.resize(m);
  rs.vz_identity.resize(m);
  for (Eigen::Index k = 0; k + 1 < m; ++k)
    rs.fd_step = std::max(rs.fd_step, rec.grid[k + 1] - rec.grid[k]);

  for (Eigen::Index k = 0; k < m; ++k) {
    const double t = rec.grid[k];
    const bool at_bp = std::any_of(bps.begin(), bps.end(), [&](double b) {
      return std::abs(b - t) <= 1e-12 * std::max(1.0, std::abs(span));
    });
    const Stencil st = stencil_at(rec.grid, k, at_bp);
    const Side side = (k == m - 1) ? Side::Left : Side::Right;
    const Coefficients c = ham.at(t, side);
    const Eigen::MatrixXd epsA = form.upper * c.A;
    const Eigen::MatrixXd Aeps = c.A * form.upper;
    const Eigen::VectorXd epsB = form.upper * c.B;
    const Eigen::MatrixXcd epsAc = epsA.cast<Complex>();
    const Eigen::VectorXcd epsBc = epsB.cast<Complex>();

    rs.canonical[k] = canonical_residual(rec.V[k], form);
    rs.conjugacy[k] =
        (rec.V[k].bottomRows(n) - rec.V[k].topRows(n).conjugate()).cwiseAbs().maxCoeff();
    rs.z_symplectic[k] = symplectic_residual(prop.Z[k], form);
    rs.vz_identity[k] =
        (rec.V[k].cast<Complex>() * prop.Z[k].cast<Complex>() - rec.V[0]).cwiseAbs().maxCoeff();

    Eigen::MatrixXcd dV = Eigen::MatrixXcd::Zero(2 * n, 2 * n);
    Eigen::VectorXcd du = Eigen::VectorXcd::Zero(n);
    Eigen::MatrixXd dG = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    Eigen::VectorXd dg = Eigen::VectorXd::Zero(2 * n);
    double dc = 0.0;
    Eigen::MatrixXd dZ = Eigen::MatrixXd::Zero(2 * n, 2 * n);
    Eigen::VectorXd dd = Eigen::VectorXd::Zero(2 * n);
    for (int p = 0; p < st.points; ++p) {
      const Eigen::Index i = st.idx[p];
      const double w = st.w[p];
      dV += w * rec.V[i];
      du += w * rec.u[i];
      dG += w * quad.G[i];
      dg += w * quad.g[i];
      dc += w * quad.c[i];
      dZ += w * prop.Z[i];
      dd += w * prop.d[i];
    }

    rs.v_equation[k] = (dV + 2.0 * rec.V[k] * epsAc).cwiseAbs().maxCoeff();
    rs.u_equation[k] = (du + rec.V[k].topRows(n) * epsBc).cwiseAbs().maxCoeff();
    const double res_G =
        (dG - 2.0 * Aeps * quad.G[k] + 2.0 * quad.G[k] * epsA).cwiseAbs().maxCoeff();
    const double res_g =
        (dg - 2.0 * Aeps * quad.g[k] + 2.0 * quad.G[k] * epsB).cwiseAbs().maxCoeff();
    const double res_c = std::abs(dc + quad.g[k].dot(epsB));
    rs.quadratic[k] = std::max({res_G, res_g, res_c});
    const Eigen::MatrixXd M = 2.0 * epsA;
    const double res_Z = (dZ - M * prop.Z[k]).cwiseAbs().maxCoeff();
    const double res_d = (dd - M * prop.d[k] - epsB).cwiseAbs().maxCoeff();
    rs.heisenberg[k] = std::max(res_Z, res_d);
  }
  return rs;
}

namespace {

struct Emitted {
  std::string name;
  std::uintmax_t bytes = 0;
  std::string hash;
};

Emitted finalize_file(const std::filesystem::path& dir, const std::string& name) {
  const auto path = dir / name;
  std::ifstream in(path, std::ios::binary);
  std::ostringstream buf;
  buf << in.rdbuf();
  const std::string bytes = buf.str();
  return Emitted{name, bytes.size(), hash_hex(fnv1a64(bytes))};
}

std::vector<std::string> mode_columns(const std::string& stem, Eigen::Index n) {
  std::vector<std::string> cols;
  for (Eigen::Index i = 1; i <= n; ++i) cols.push_back(stem + "_" + std::to_string(i));
  return cols;
}

Emitted emit_moments_csv(const std::filesystem::path& dir, const MomentReport& rep) {
  const Eigen::Index n = rep.n_modes;
  std::vector<std::string> header{"t"};
  for (const auto& stem : {"mean_q", "mean_p", "var_q", "var_p", "product"})
    for (const auto& c : mode_columns(stem, n)) header.push_back(c);
  CsvWriter csv(dir / "moments.csv", header);
  std::vector<double> row;
  for (Eigen::Index k = 0; k < rep.grid.size(); ++k) {
    row.clear();
    row.push_back(rep.grid[k]);
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(rep.mean_q[k][i]);
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(rep.mean_p[k][i]);
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(rep.var_q[k][i]);
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(rep.var_p[k][i]);
    for (Eigen::Index i = 0; i < n; ++i) row.push_back(rep.uncertainty[k][i]);
    csv.row(row);
  }
  csv.close();
  return finalize_file(dir, "moments.csv");
}

Emitted emit_propagator_csv(const std::filesystem::path& dir, const Propagator& prop) {
  const Eigen::Index d = 2 * prop.n_modes;
  std::vector<std::string> header{"t"};
  for (Eigen::Index i = 1; i <= d; ++i)
    for (Eigen::Index j = 1; j <= d; ++j)
      header.push_back("Z_" + std::to_string(i) + "_" + std::to_string(j));
  for (Eigen::Index i = 1; i <= d; ++i) header.push_back("d_" + std::to_string(i));
  CsvWriter csv(dir / "propagator.csv", header);
  std::vector<double> row;
  for (Eigen::Index k = 0; k < prop.grid.size(); ++k) {
    row.clear();
    row.push_back(prop.grid[k]);
    for (Eigen::Index i = 0; i < d; ++i)
      for (Eigen::Index j = 0; j < d; ++j) row.push_back(prop.Z[k](i, j));
    for (Eigen::Index i = 0; i < d; ++i) row.push_back(prop.d[k][i]);
    csv.row(row);
  }
  csv.close();
  return finalize_file(dir, "propagator.csv");
}

Emitted emit_residuals_csv(const std::filesystem::path& dir, const Eigen::VectorXd& grid,
                           const ResidualSeries& rs) {
  CsvWriter csv(dir / "invariant_residuals.csv",
                {"t", "canonical", "conjugacy", "v_equation", "u_equation", "quadratic",
                 "heisenberg", "z_symplectic", "vz_identity"});
  for (Eigen::Index k = 0; k < grid.size(); ++k)
    csv.row({grid[k], rs.canonical[k], rs.conjugacy[k], rs.v_equation[k], rs.u_equation[k],
             rs.quadratic[k], rs.heisenberg[k], rs.z_symplectic[k], rs.vz_identity[k]});
  csv.close();
  return finalize_file(dir, "invariant_residuals.csv");
}

Emitted emit_classical_csv(const std::filesystem::path& dir, const ClassicalTrajectory& traj,
                           Eigen::Index n) {
  std::vector<std::string> header{"t"};
  for (const auto& c : mode_columns("q", n)) header.push_back(c);
  for (const auto& c : mode_columns("p", n)) header.push_back(c);
  CsvWriter csv(dir / "classical.csv", header);
  std::vector<double> row;
  for (Eigen::Index k = 0; k < traj.grid.size(); ++k) {
    row.clear();
    row.push_back(traj.grid[k]);
    for (Eigen::Index i = 0; i < 2 * n; ++i) row.push_back(traj.z[k][i]);
    csv.row(row);
  }
  csv.close();
  return finalize_file(dir, "classical.csv");
}

std::vector<Emitted> emit_moment_plots(const std::filesystem::path& dir,
                                       const MomentReport& rep) {
  const Eigen::Index n = rep.n_modes;
  std::vector<double> ts(rep.grid.data(), rep.grid.data() + rep.grid.size());
  struct Plot {
    const char* file;
    const char* title;
    const char* ylabel;
    const std::vector<Eigen::VectorXd>* data;
  };
  const Plot plots[] = {
      {"moments_var_q.svg", "Position variance", "var q_i", &rep.var_q},
      {"moments_var_p.svg", "Momentum variance", "var p_i", &rep.var_p},
      {"moments_mean_q.svg", "Position mean", "mean q_i", &rep.mean_q},
      {"moments_mean_p.svg", "Momentum mean", "mean p_i", &rep.mean_p},
      {"moments_uncertainty.svg", "Uncertainty products", "dq_i dp_i", &rep.uncertainty},
  };
  std::vector<Emitted> out;
  for (const auto& plot : plots) {
    std::vector<PlotSeries> series;
    for (Eigen::Index i = 0; i < n; ++i) {
      PlotSeries s;
      s.name = "mode " + std::to_string(i + 1);
      s.x = ts;
      s.y.reserve(ts.size());
      for (const auto& v : *plot.data) s.y.push_back(v[i]);
      series.push_back(std::move(s));
    }
    write_line_plot(dir / plot.file, plot.title, "t", plot.ylabel, series);
    out.push_back(finalize_file(dir, plot.file));
  }
  return out;
}

json state_echo(const StateSpec& state) {
  json j;
  if (state.kind == StateSpec::Kind::Number) {
    j["type"] = "number";
    j["n"] = state.n;
  } else {
    j["type"] = "coherent";
    std::vector<double> re, im;
    for (Eigen::Index i = 0; i < state.alpha.size(); ++i) {
      re.push_back(state.alpha[i].real());
      im.push_back(state.alpha[i].imag());
    }
    j["alpha_real"] = re;
    j["alpha_imag"] = im;
  }
  return j;
}

json tolerance_echo(double fd_tol) {
  json t;
  t["canonical_pass"] = tol::canonical_pass;
  t["canonical_abort"] = tol::canonical_abort;
  t["conjugacy_pass"] = tol::conjugacy_pass;
  t["fd_residual_pass"] = fd_tol;
  t["heisenberg_identity_pass"] = tol::heisenberg_identity_pass;
  t["propagator_imag_abort"] = tol::propagator_imag_abort;
  t["lr_imag_abort"] = tol::lr_imag_abort;
  t["heisenberg_bound_slack"] = tol::heisenberg_bound_slack;
  return t;
}

double fd_tolerance(double fd_step) {
  const double scale = fd_step / tol::fd_probe_step;
  return tol::fd_residual_pass * std::max(1.0, scale * scale);
}

}  // namespace

int run_scenario(const Scenario& sc, const RunOptions& opt, std::ostream& log) {
  Pipeline pl = build_pipeline(sc, opt);
  const SolutionRecord rec = integrate_solution(pl.ham, pl.omegas, pl.grid);
  const PrimaryInvariantSet prim = build_primary(rec);
  const QuadraticInvariant quad = lr_invariant(prim);
  const Propagator prop = build_propagator(rec);
  const MomentReport report = state_moments(rec, pl.state);
  const ResidualSeries residuals = build_residual_series(rec, quad, prop, pl.ham);

  std::filesystem::create_directories(opt.out_dir);
  std::vector<Emitted> files;
  for (const auto& output : sc.outputs) {
    if (output == "moments") {
      files.push_back(emit_moments_csv(opt.out_dir, report));
      for (auto& e : emit_moment_plots(opt.out_dir, report)) files.push_back(std::move(e));
    } else if (output == "propagator") {
      files.push_back(emit_propagator_csv(opt.out_dir, prop));
    } else if (output == "invariant_residuals") {
      files.push_back(emit_residuals_csv(opt.out_dir, rec.grid, residuals));
    } else if (output == "classical") {
      Eigen::VectorXd z0 = Eigen::VectorXd::Zero(2 * rec.n_modes);
      if (pl.state.kind == StateSpec::Kind::Coherent)
        z0 = coherent_initial_point(pl.state.alpha, rec.omegas);
      const ClassicalTrajectory traj = integrate_classical(pl.ham, z0, pl.grid);
      files.push_back(emit_classical_csv(opt.out_dir, traj, rec.n_modes));
    }
  }

  json manifest;
  manifest["generator"] = "paraosc";
  manifest["format_version"] = 1;
  manifest["scenario"] = sc.raw.is_null() ? json::object() : sc.raw;
  json resolved;
  resolved["label"] = sc.label;
  resolved["n_modes"] = rec.n_modes;
  resolved["omegas"] = std::vector<double>(rec.omegas.data(), rec.omegas.data() + rec.omegas.size());
  resolved["t0"] = pl.grid.t0;
  resolved["t1"] = pl.grid.t1;
  resolved["dt"] = pl.grid.dt;
  resolved["default_dt_used"] = pl.default_dt_used;
  resolved["grid_points"] = rec.grid.size();
  resolved["hamiltonian"] = pl.ham.label();
  resolved["tabulated"] = pl.ham.tabulated();
  resolved["C_t0"] = pl.ham.at(pl.grid.t0).C;
  resolved["state"] = state_echo(pl.state);
  manifest["resolved"] = resolved;
  manifest["tolerances"] = tolerance_echo(fd_tolerance(residuals.fd_step));
  json maxima;
  maxima["canonical"] = rec.max_canonical_residual;
  maxima["conjugacy"] = rec.max_conjugacy_residual;
  maxima["v_equation_fd"] = residuals.v_equation.maxCoeff();
  maxima["u_equation_fd"] = residuals.u_equation.maxCoeff();
  maxima["quadratic_fd"] = residuals.quadratic.maxCoeff();
  maxima["heisenberg_fd"] = residuals.heisenberg.maxCoeff();
  maxima["z_symplectic"] = residuals.z_symplectic.maxCoeff();
  maxima["vz_identity"] = residuals.vz_identity.maxCoeff();
  maxima["propagator_imag"] = prop.max_imag_residual;
  maxima["lr_imag"] = quad.max_imag_residual;
  manifest["residual_maxima"] = maxima;
  json outputs = json::array();
  for (const auto& e : files) {
    json f;
    f["file"] = e.name;
    f["bytes"] = e.bytes;
    f["fnv1a64"] = e.hash;
    outputs.push_back(f);
  }
  manifest["outputs"] = outputs;
  json notes = json::array();
  if (pl.ham.tabulated())
    notes.push_back(
        "sampled-table schedule: linear interpolation at substages reduces the stepper order "
        "to 2");
  manifest["notes"] = notes;

  {
    std::ofstream out(opt.out_dir / "manifest.json", std::ios::binary);
    out << manifest.dump(2) << "\n";
  }

  log << "run: " << sc.label << " -> " << opt.out_dir.string() << " (" << rec.grid.size()
      << " grid points";
  for (const auto& e : files) log << ", " << e.name;
  log << ", manifest.json)\n";
  return 0;
}

int validate_scenario(const Scenario& sc, const RunOptions& opt, std::ostream& log) {
  Pipeline pl = build_pipeline(sc, opt);
  const SolutionRecord rec = integrate_solution(pl.ham, pl.omegas, pl.grid);
  const PrimaryInvariantSet prim = build_primary(rec);
  const QuadraticInvariant quad = lr_invariant(prim);
  const Propagator prop = build_propagator(rec);
  const ResidualSeries rs = build_residual_series(rec, quad, prop, pl.ham);
  const double fd_tol = fd_tolerance(rs.fd_step);

  struct Row {
    const char* name;
    double value;
    double tolerance;
  };
  const Row rows[] = {
      {"canonical (ii)", rec.max_canonical_residual, tol::canonical_pass},
      {"conjugacy (i)", rec.max_conjugacy_residual, tol::conjugacy_pass},
      {"v-equation fd", rs.v_equation.maxCoeff(), fd_tol},
      {"u-equation fd", rs.u_equation.maxCoeff(), fd_tol},
      {"quadratic fd", rs.quadratic.maxCoeff(), fd_tol},
      {"heisenberg fd", rs.heisenberg.maxCoeff(), fd_tol},
      {"Z symplectic", rs.z_symplectic.maxCoeff(), tol::heisenberg_identity_pass},
      {"V Z = V(0)", rs.vz_identity.maxCoeff(), tol::heisenberg_identity_pass},
      {"propagator imag", prop.max_imag_residual, tol::propagator_imag_warn},
      {"LR imag", quad.max_imag_residual, tol::lr_real_pass},
  };

  log << "validate: " << sc.label << " (n_modes=" << rec.n_modes << ", grid "
      << rec.grid.size() << " points, dt=" << fmt(pl.grid.dt) << ")\n";
  bool all_pass = true;
  log << std::left;
  for (const auto& row : rows) {
    const bool pass = row.value <= row.tolerance;
    all_pass = all_pass && pass;
    log << "  " << std::setw(18) << row.name << " max " << std::setw(13)
        << fmt(row.value) << " tol " << std::setw(13) << fmt(row.tolerance)
        << (pass ? "PASS" : "FAIL") << "\n";
  }
  if (pl.ham.tabulated())
    log << "  note: sampled-table schedule; linear interpolation at substages reduces the "
           "stepper order to 2\n";
  log << "validate: " << (all_pass ? "PASS" : "FAIL") << "\n";
  return all_pass ? 0 : 3;
}

int oracle_compare(const Scenario& sc, const RunOptions& opt, std::ostream& log) {
  Pipeline pl = build_pipeline(sc, opt);
  const SolutionRecord rec = integrate_solution(pl.ham, pl.omegas, pl.grid);
  const MomentReport invariant_report = state_moments(rec, pl.state);

  FockConfig cfg;
  cfg.cutoff = sc.oracle.cutoff;
  cfg.dt = sc.oracle.dt;
  cfg.estimate_truncation = sc.oracle.estimate_truncation;
  cfg.certify_tol = sc.oracle.certify_tol;
  const OracleResult oracle = oracle_moments(pl.ham, pl.state, pl.omegas, cfg, pl.grid);
  const MomentReport& fock = oracle.report;

  const Eigen::Index n = rec.n_modes;
  std::filesystem::create_directories(opt.out_dir);
  std::vector<std::string> header{"t"};
  for (const auto& stem : {"mean_q", "mean_p", "var_q", "var_p"})
    for (Eigen::Index i = 1; i <= n; ++i) {
      header.push_back(std::string(stem) + "_" + std::to_string(i) + "_invariant");
      header.push_back(std::string(stem) + "_" + std::to_string(i) + "_fock");
    }
  CsvWriter csv(opt.out_dir / "oracle_compare.csv", header);

  double deviation = 0.0;
  std::vector<double> row;
  for (Eigen::Index k = 0; k < rec.grid.size(); ++k) {
    row.clear();
    row.push_back(rec.grid[k]);
    auto push_pair = [&](const Eigen::VectorXd& a, const Eigen::VectorXd& b, Eigen::Index i) {
      row.push_back(a[i]);
      row.push_back(b[i]);
      deviation = std::max(deviation, std::abs(a[i] - b[i]));
    };
    for (Eigen::Index i = 0; i < n; ++i)
      push_pair(invariant_report.mean_q[k], fock.mean_q[k], i);
    for (Eigen::Index i = 0; i < n; ++i)
      push_pair(invariant_report.mean_p[k], fock.mean_p[k], i);
    for (Eigen::Index i = 0; i < n; ++i)
      push_pair(invariant_report.var_q[k], fock.var_q[k], i);
    for (Eigen::Index i = 0; i < n; ++i)
      push_pair(invariant_report.var_p[k], fock.var_p[k], i);
    csv.row(row);
  }
  csv.close();

  const bool pass = deviation <= sc.oracle.tolerance;
  log << "oracle-compare: max deviation " << fmt(deviation) << " (tolerance "
      << fmt(sc.oracle.tolerance) << ")";
  if (oracle.truncation_sensitivity >= 0.0)
    log << ", truncation sensitivity " << fmt(oracle.truncation_sensitivity);
  log << ", norm drift " << fmt(oracle.norm_drift) << " -> " << (pass ? "PASS" : "FAIL")
      << "\n";
  return pass ? 0 : 3;
}

}  // namespace paraosc
