#include "lrt/imex.hpp"

#include <fstream>
#include <iomanip>
#include <sstream>
#include <stdexcept>

namespace lrt {

using Mat = Eigen::MatrixXd;
using Vec = Eigen::VectorXd;

ButcherPair ButcherPair::make(std::string name, Mat a_exp, Mat a_imp, Vec b_exp, Vec b_imp) {
  const auto s = a_exp.rows();
  if (s < 1 || a_exp.cols() != s || a_imp.rows() != s || a_imp.cols() != s || b_exp.size() != s ||
      b_imp.size() != s)
    throw std::invalid_argument("tableau dimensions are inconsistent");
  for (Eigen::Index i = 0; i < s; ++i)
    for (Eigen::Index j = i; j < s; ++j) {
      if (a_exp(i, j) != 0.0) throw std::invalid_argument("explicit table must be strictly lower triangular");
      if (j > i && a_imp(i, j) != 0.0) throw std::invalid_argument("implicit table must be lower triangular");
    }
  for (Eigen::Index i = 0; i < s; ++i)
    if (a_imp(i, i) < 0.0) throw std::invalid_argument("implicit diagonal must be nonnegative");
  ButcherPair p;
  p.name = std::move(name);
  p.stages = static_cast<int>(s);
  p.c_exp = a_exp.rowwise().sum();
  p.c_imp = a_imp.rowwise().sum();
  p.a_exp = std::move(a_exp);
  p.a_imp = std::move(a_imp);
  p.b_exp = std::move(b_exp);
  p.b_imp = std::move(b_imp);
  return p;
}

bool ButcherPair::is_gsa() const {
  return b_exp == a_exp.row(stages - 1).transpose() && b_imp == a_imp.row(stages - 1).transpose();
}

bool ButcherPair::implicit_part_invertible() const {
  // ARS-type tables have a_11 = 0: the first stage is explicit and the solve
  // runs over the remaining block, which is triangular.
  const int first = a_imp(0, 0) == 0.0 ? 1 : 0;
  for (int i = first; i < stages; ++i)
    if (!(a_imp(i, i) > 0.0)) return false;
  return true;
}

ButcherPair imex111() {
  Mat ae(2, 2), ai(2, 2);
  ae << 0, 0, 1, 0;
  ai << 0, 0, 0, 1;
  Vec be(2), bi(2);
  be << 1, 0;
  bi << 0, 1;
  return ButcherPair::make("imex111", ae, ai, be, bi);
}

ButcherPair ars_gsa_3() {
  Mat ae = Mat::Zero(5, 5), ai = Mat::Zero(5, 5);
  ae(1, 0) = 1.0 / 2;
  ae(2, 0) = 11.0 / 18, ae(2, 1) = 1.0 / 18;
  ae(3, 0) = 5.0 / 6, ae(3, 1) = -5.0 / 6, ae(3, 2) = 1.0 / 2;
  ae(4, 0) = 1.0 / 4, ae(4, 1) = 7.0 / 4, ae(4, 2) = 3.0 / 4, ae(4, 3) = -7.0 / 4;
  ai(1, 1) = 1.0 / 2;
  ai(2, 1) = 1.0 / 6, ai(2, 2) = 1.0 / 2;
  ai(3, 1) = -1.0 / 2, ai(3, 2) = 1.0 / 2, ai(3, 3) = 1.0 / 2;
  ai(4, 1) = 3.0 / 2, ai(4, 2) = -3.0 / 2, ai(4, 3) = 1.0 / 2, ai(4, 4) = 1.0 / 2;
  return ButcherPair::make("ars443", ae, ai, ae.row(4).transpose(), ai.row(4).transpose());
}

std::vector<OrderResidual> order_conditions(const ButcherPair& p, int order) {
  if (order < 1 || order > 3) throw std::invalid_argument("order conditions are available for p in 1..3");
  std::vector<OrderResidual> out;
  const Vec& be = p.b_exp;
  const Vec& bi = p.b_imp;
  const Vec& ce = p.c_exp;
  const Vec& ci = p.c_imp;
  out.push_back({"sum b~ = 1", 1, be.sum() - 1.0});
  out.push_back({"sum b = 1", 1, bi.sum() - 1.0});
  if (order >= 2) {
    out.push_back({"b~.c~ = 1/2", 2, be.dot(ce) - 0.5});
    out.push_back({"b.c = 1/2", 2, bi.dot(ci) - 0.5});
    out.push_back({"b~.c = 1/2", 2, be.dot(ci) - 0.5});
    out.push_back({"b.c~ = 1/2", 2, bi.dot(ce) - 0.5});
  }
  if (order >= 3) {
    const std::pair<const char*, const Vec*> ws[] = {{"b~", &be}, {"b", &bi}};
    const std::pair<const char*, const Vec*> cs[] = {{"c~", &ce}, {"c", &ci}};
    const std::pair<const char*, const Mat*> ms[] = {{"A~", &p.a_exp}, {"A", &p.a_imp}};
    for (const auto& [wn, w] : ws) {
      for (int u = 0; u < 2; ++u)
        for (int v = u; v < 2; ++v) {
          const double r = w->dot(cs[u].second->cwiseProduct(*cs[v].second)) - 1.0 / 3.0;
          out.push_back({std::string(wn) + "." + cs[u].first + cs[v].first + " = 1/3", 3, r});
        }
      for (const auto& [mn, m] : ms)
        for (const auto& [cn, c] : cs) {
          const double r = w->dot(*m * *c) - 1.0 / 6.0;
          out.push_back({std::string(wn) + "." + mn + "." + cn + " = 1/6", 3, r});
        }
    }
  }
  return out;
}

namespace {

double parse_number(const std::string& tok) {
  std::size_t used = 0;
  const auto slash = tok.find('/');
  try {
    if (slash == std::string::npos) {
      const double v = std::stod(tok, &used);
      if (used != tok.size()) throw std::invalid_argument(tok);
      return v;
    }
    const std::string num = tok.substr(0, slash), den = tok.substr(slash + 1);
    std::size_t u1 = 0, u2 = 0;
    const double a = std::stod(num, &u1), b = std::stod(den, &u2);
    if (u1 != num.size() || u2 != den.size() || b == 0.0) throw std::invalid_argument(tok);
    return a / b;
  } catch (const std::logic_error&) {
    throw std::invalid_argument("bad tableau entry '" + tok + "'");
  }
}

}  // namespace

ButcherPair parse_tableau(std::istream& in) {
  std::vector<std::string> tokens;
  std::string line;
  while (std::getline(in, line)) {
    if (auto h = line.find('#'); h != std::string::npos) line.resize(h);
    std::istringstream ls(line);
    std::string tok;
    while (ls >> tok) tokens.push_back(tok);
  }
  std::size_t pos = 0;
  auto next = [&]() -> const std::string& {
    if (pos >= tokens.size()) throw std::invalid_argument("unexpected end of tableau");
    return tokens[pos++];
  };
  std::string name = "custom";
  int s = 0;
  Mat ae, ai;
  Vec be, bi;
  bool seen[4] = {false, false, false, false};
  while (pos < tokens.size()) {
    const std::string key = next();
    if (key == "name") {
      name = next();
    } else if (key == "stages") {
      s = static_cast<int>(parse_number(next()));
      if (s < 1 || s > 64) throw std::invalid_argument("bad stage count");
    } else if (key == "explicit" || key == "implicit") {
      if (s < 1) throw std::invalid_argument("'stages' must precede the tables");
      Mat m(s, s);
      for (int i = 0; i < s; ++i)
        for (int j = 0; j < s; ++j) m(i, j) = parse_number(next());
      (key == "explicit" ? ae : ai) = m;
      seen[key == "explicit" ? 0 : 1] = true;
    } else if (key == "explicit_weights" || key == "implicit_weights") {
      if (s < 1) throw std::invalid_argument("'stages' must precede the weights");
      Vec v(s);
      for (int i = 0; i < s; ++i) v(i) = parse_number(next());
      (key == "explicit_weights" ? be : bi) = v;
      seen[key == "explicit_weights" ? 2 : 3] = true;
    } else {
      throw std::invalid_argument("unknown tableau key '" + key + "'");
    }
  }
  for (bool b : seen)
    if (!b) throw std::invalid_argument("tableau is missing a table or weight block");
  return ButcherPair::make(name, ae, ai, be, bi);
}

ButcherPair load_tableau(const std::string& path) {
  std::ifstream in(path);
  if (!in) throw std::runtime_error("cannot open tableau file " + path);
  return parse_tableau(in);
}

void write_tableau(const ButcherPair& p, std::ostream& out) {
  out << std::setprecision(17);
  out << "name " << p.name << "\nstages " << p.stages << "\n";
  auto mat = [&](const char* key, const Mat& m) {
    out << key << "\n";
    for (int i = 0; i < p.stages; ++i) {
      for (int j = 0; j < p.stages; ++j) out << (j ? " " : "") << m(i, j);
      out << "\n";
    }
  };
  auto vec = [&](const char* key, const Vec& v) {
    out << key << "\n";
    for (int i = 0; i < p.stages; ++i) out << (i ? " " : "") << v(i);
    out << "\n";
  };
  mat("explicit", p.a_exp);
  vec("explicit_weights", p.b_exp);
  mat("implicit", p.a_imp);
  vec("implicit_weights", p.b_imp);
}

ImexStep imex_step(const ButcherPair& p, double t, double dt, const Vec& y,
                   const std::function<Vec(double, const Vec&)>& f, const Mat& l,
                   const std::function<Vec(double)>& h) {
  const int s = p.stages;
  std::vector<Vec> fe(s), gi(s), ys(s);
  const Mat id = Mat::Identity(y.size(), y.size());
  for (int i = 0; i < s; ++i) {
    Vec rhs = y;
    for (int j = 0; j < i; ++j) rhs += dt * (p.a_exp(i, j) * fe[j] + p.a_imp(i, j) * gi[j]);
    const double ti = t + p.c_imp(i) * dt;
    const double aii = p.a_imp(i, i);
    if (aii != 0.0) {
      rhs += dt * aii * h(ti);
      ys[i] = (id - dt * aii * l).partialPivLu().solve(rhs);
    } else {
      ys[i] = rhs;
    }
    fe[i] = f(t + p.c_exp(i) * dt, ys[i]);
    gi[i] = l * ys[i] + h(ti);
  }
  ImexStep out{ys[s - 1], y};
  for (int j = 0; j < s; ++j) out.weighted += dt * (p.b_exp(j) * fe[j] + p.b_imp(j) * gi[j]);
  return out;
}

}  // namespace lrt
