#pragma once

#include <limits>
#include <optional>
#include <tuple>

#include "stepper.hpp"

namespace stefan {

struct Snapshot {
  double t = 0.0;
  Field q;
  BoundaryField h;
  BoundaryField h_t;
  VectorField v;
  double margin = 0.0;
};

inline Snapshot snapshot(const SolverState& s) { return {s.t, s.q, s.h, s.h_t, s.v, s.margin}; }

/// Equally spaced snapshots of one run, plus substituted derivatives at t = 0.
struct Trajectory {
  SolverConfig cfg;
  std::vector<Snapshot> frames;
  std::optional<Stepper::FlowDerivatives> start;

  double spacing() const { return frames.size() > 1 ? frames[1].t - frames[0].t : 0.0; }
};

/// Time-derivative fields at one snapshot.
struct FrameFields {
  Field q, q_t, q_tt;
  BoundaryField h, h_t, h_tt, h_ttt;
  VectorField v, v_t, v_tt;
  double t = 0.0;
};

inline FrameFields frame_fields(const Trajectory& tr, std::size_t n) {
  const auto& F = tr.frames;
  if (F.size() < 4) throw Error(ErrorKind::needs_more_steps, "energies need at least four snapshots");
  FrameFields f;
  f.t = F[n].t;
  f.q = F[n].q;
  f.h = F[n].h;
  f.h_t = F[n].h_t;
  f.v = F[n].v;
  if (n == 0 && tr.start) {
    const auto& s = *tr.start;
    f.q_t = s.q_t;
    f.q_tt = s.q_tt;
    f.h_tt = s.h_tt;
    f.h_ttt = s.h_ttt;
    f.v_t = s.v_t;
    f.v_tt = s.v_tt;
    return f;
  }
  const double d = tr.spacing();
  auto gather = [&](auto get) {
    using V = std::decay_t<decltype(get(F[0]))>;
    std::vector<const V*> p;
    for (const auto& s : F) p.push_back(&get(s));
    return p;
  };
  auto pq = gather([](const Snapshot& s) -> const Field& { return s.q; });
  auto pht = gather([](const Snapshot& s) -> const BoundaryField& { return s.h_t; });
  f.q_t = fd_time_derivative(pq, d, n, 1);
  f.q_tt = fd_time_derivative(pq, d, n, 2);
  f.h_tt = fd_time_derivative(pht, d, n, 1);
  f.h_ttt = fd_time_derivative(pht, d, n, 2);
  std::vector<const Field*> v0, v1;
  for (const auto& s : F) {
    v0.push_back(&s.v[0]);
    v1.push_back(&s.v[1]);
  }
  f.v_t = VectorField(fd_time_derivative(v0, d, n, 1), fd_time_derivative(v1, d, n, 1));
  f.v_tt = VectorField(fd_time_derivative(v0, d, n, 2), fd_time_derivative(v1, d, n, 2));
  return f;
}

/// Ingredients of the natural (weighted) energy for one geometry.
struct NaturalTerms {
  double ht_L4 = 0, ht_C3 = 0, bnd_C4 = 0, bnd_L3 = 0, div_C4 = 0, div_L3 = 0;
  bool defined = true;
};

/// Squared norms at one snapshot; C-terms are maximized and L-terms
/// integrated in time by the accumulator.
struct FrameTerms {
  double t = 0;
  double v4 = 0, v3 = 0, v2 = 0, v1 = 0;
  double qC = 0, qL = 0, qClow = 0, qLlow = 0;
  double hC = 0, hL = 0, hClow = 0, hLlow = 0;
  double lhC = 0, lhL = 0, lhClow = 0, lhLlow = 0;
  double ht4 = 0, ht3 = 0, ht2 = 0, ht1 = 0;
  double hsC = 0, hsL = 0;
  double fsC = 0, fsL = 0;
  NaturalTerms nat, natk;
  double margin = 0;
};

namespace detail {

inline double bsq(const BoundaryField& f, double s) {
  const double n = boundary_norm(f, s);
  return n * n;
}

/// sum_{a <= amax} |w d^a f|_0^2 for a pointwise weight w.
inline double weighted_tangential_sq(const BoundaryField& f, const BoundaryField& w, int amax, int shift = 0) {
  double acc = 0.0;
  for (int a = 0; a <= amax; ++a) acc += bsq(w * tangential_derivative(f, a + shift), 0.0);
  return acc;
}

/// sum_{a+2b<=m} |d^a d_t^b f|^2 for f, f_t, f_tt given.
inline double tangential_time_sq(const std::vector<const BoundaryField*>& fb, int m) {
  double acc = 0.0;
  for (int b = 0; 2 * b <= m && b < static_cast<int>(fb.size()); ++b) acc += boundary_tangential_sq(*fb[b], m - 2 * b);
  return acc;
}

inline double vector_time_sq(const std::vector<const VectorField*>& fv, int m) {
  double acc = 0.0;
  for (int b = 0; 2 * b <= m && b < static_cast<int>(fv.size()); ++b) acc += vector_tangential_sq(*fv[b], m - 2 * b);
  return acc;
}

inline NaturalTerms natural_terms(const FrameFields& f, const MetricBundle& geo, const std::array<BoundaryField, 4>& hb,
                                  const std::array<BoundaryField, 3>& hg) {
  // hb: boundary height and its first three time derivatives (h or Lambda h);
  // hg: geometry height and its time derivatives (h or Lambda Lambda h)
  const Grid& g = f.q.grid();
  const int nx = g.nx();
  NaturalTerms n;
  BoundaryField Jm12(nx), Jm1(nx), wq(nx);
  BoundaryField qy = bottom_dy(f.q);
  for (int i = 0; i < nx; ++i) {
    const double J = geo.J(i, 0);
    Jm12[i] = 1.0 / std::sqrt(J);
    Jm1[i] = 1.0 / J;
    if (qy[i] <= 0.0) n.defined = false;
    wq[i] = std::sqrt(std::max(qy[i], 0.0)) / std::sqrt(J);
  }
  const std::array<const BoundaryField*, 3> ht = {&f.h_t, &f.h_tt, &f.h_ttt};
  for (int b = 0; b <= 2; ++b) n.ht_L4 += weighted_tangential_sq(*ht[b], Jm12, 4 - 2 * b);
  for (int b = 0; b <= 1; ++b) n.ht_C3 += weighted_tangential_sq(*ht[b], Jm1, 3 - 2 * b);
  for (int b = 0; b <= 2; ++b) n.bnd_C4 += weighted_tangential_sq(hb[b], wq, 4 - 2 * b);
  for (int b = 0; b <= 1; ++b) n.bnd_L3 += weighted_tangential_sq(hb[b + 1], wq, 3 - 2 * b);
  if (!n.defined) {
    n.bnd_C4 = n.bnd_L3 = std::numeric_limits<double>::quiet_NaN();
  }
  // d^a d_t^b Psi . v = [a==1, b==0] v^1 + (d^a d_t^b Phi) v^2
  const std::array<Field, 3> phis = {geo.map.phi, extend_displacement(hg[1], g).phi, extend_displacement(hg[2], g).phi};
  const std::array<const Field*, 3> qs = {&f.q, &f.q_t, &f.q_tt};
  auto div_term = [&](int a, int b, int shift) {
    Field term = tangential_derivative(*qs[b + shift], a);
    Field dphi = tangential_derivative(phis[b + shift], a);
    for (std::size_t k = 0; k < term.size(); ++k) term[k] += dphi[k] * f.v[1][k];
    if (a == 1 && b + shift == 0) term += f.v[0];
    return interior_norm_sq(term, 0);
  };
  for (int b = 0; b <= 2; ++b)
    for (int a = 0; a + 2 * b <= 4; ++a) n.div_C4 += div_term(a, b, 0);
  for (int b = 0; b <= 1; ++b)
    for (int a = 0; a + 2 * b <= 3; ++a) n.div_L3 += div_term(a, b, 1);
  return n;
}

}  // namespace detail

inline FrameTerms frame_terms(const FrameFields& f, const SolverConfig& cfg) {
  using detail::bsq;
  const Grid& g = f.q.grid();
  const int nx = g.nx();
  FrameTerms t;
  t.t = f.t;
  t.margin = taylor_margin(f.q);
  const std::vector<const VectorField*> vv = {&f.v, &f.v_t, &f.v_tt};
  t.v4 = detail::vector_time_sq(vv, 4);
  t.v3 = detail::vector_time_sq(vv, 3);
  t.v2 = detail::vector_time_sq(vv, 2);
  t.v1 = detail::vector_time_sq(vv, 1);
  t.qC = interior_norm_sq(f.q, 4) + interior_norm_sq(f.q_t, 2) + interior_norm_sq(f.q_tt, 0);
  t.qL = interior_norm_sq(f.q, 5) + interior_norm_sq(f.q_t, 3) + interior_norm_sq(f.q_tt, 1);
  t.qClow = interior_norm_sq(f.q, 2) + interior_norm_sq(f.q_t, 0);
  t.qLlow = interior_norm_sq(f.q, 3) + interior_norm_sq(f.q_t, 1);
  t.hC = bsq(f.h, 4) + bsq(f.h_t, 2) + bsq(f.h_tt, 0);
  t.hL = bsq(f.h_t, 3) + bsq(f.h_tt, 1);
  t.hClow = bsq(f.h, 2) + bsq(f.h_t, 0);
  t.hLlow = bsq(f.h, 3) + bsq(f.h_t, 1);
  const std::vector<const BoundaryField*> htv = {&f.h_t, &f.h_tt, &f.h_ttt};
  t.ht4 = detail::tangential_time_sq(htv, 4);
  t.ht3 = detail::tangential_time_sq(htv, 3);
  t.ht2 = detail::tangential_time_sq(htv, 2);
  t.ht1 = detail::tangential_time_sq(htv, 1);
  t.hsC = bsq(f.h, 5) + bsq(f.h_t, 3) + bsq(f.h_tt, 1);
  t.hsL = bsq(f.h_t, 4) + bsq(f.h_tt, 2);

  // unsmoothed geometry
  MetricBundle geo = metric_bundle(extend_displacement(f.h, g));
  t.nat = detail::natural_terms(f, geo, {f.h, f.h_t, f.h_tt, f.h_ttt}, {f.h, f.h_t, f.h_tt});
  BoundaryField ws(nx);
  for (int i = 0; i < nx; ++i) ws[i] = std::pow(geo.g[i], -1.5) / std::sqrt(geo.J(i, 0));
  const std::array<const BoundaryField*, 3> hseq = {&f.h, &f.h_t, &f.h_tt};
  for (int b = 0; b <= 2; ++b) t.fsC += detail::weighted_tangential_sq(*hseq[b], ws, 4 - 2 * b, 1);
  for (int b = 0; b <= 1; ++b) t.fsL += detail::weighted_tangential_sq(*htv[b], ws, 3 - 2 * b, 1);

  if (cfg.mode == Mode::kappa) {
    const double k = cfg.kappa;
    std::array<BoundaryField, 4> lh = {smooth_horizontal(f.h, k), smooth_horizontal(f.h_t, k),
                                       smooth_horizontal(f.h_tt, k), smooth_horizontal(f.h_ttt, k)};
    t.lhC = bsq(lh[0], 4) + bsq(lh[1], 2) + bsq(lh[2], 0);
    t.lhL = bsq(lh[1], 3) + bsq(lh[2], 1);
    t.lhClow = bsq(lh[0], 2) + bsq(lh[1], 0);
    t.lhLlow = bsq(lh[0], 3) + bsq(lh[1], 1);
    std::array<BoundaryField, 3> hk = {smooth_horizontal(lh[0], k), smooth_horizontal(lh[1], k),
                                       smooth_horizontal(lh[2], k)};
    MetricBundle geok = metric_bundle(extend_displacement(hk[0], g));
    t.natk = detail::natural_terms(f, geok, lh, hk);
  }
  return t;
}

/// Energies at one time, each accumulated from t = 0.
struct EnergyReport {
  double t = 0;
  double E = 0;          // classical higher-order energy
  double E_sigma = 0;    // with surface-tension terms
  double E_kappa = 0;    // kappa energy, boundary terms with Lambda h
  double E_kappa_raw = 0;// same with h in place of Lambda h
  double A_kappa = 0;    // lower-order kappa energy
  double F_kappa = 0;    // natural kappa energy
  double F = 0;          // natural energy without kappa terms
  double F_sigma = 0;    // natural energy with surface-tension terms
  double margin = 0;
  bool apriori_ok = true;  // A_kappa(t) <= E_kappa(0) + 1
  bool natural_defined = true;
};

class EnergyAccumulator {
 public:
  EnergyAccumulator(const SolverConfig& cfg) : cfg_(cfg) {}

  EnergyReport add(const FrameTerms& f) {
    const double dt = has_prev_ ? f.t - prev_.t : 0.0;
    auto C = [&](double& slot, double x) { slot = std::max(slot, x); return slot; };
    auto L = [&](double& slot, double x, double xp) { slot += has_prev_ ? 0.5 * dt * (x + xp) : 0.0; return slot; };
    const FrameTerms& p = has_prev_ ? prev_ : f;
    const double kap = cfg_.kappa * cfg_.kappa, sig = cfg_.sigma;
    const bool kmode = cfg_.mode == Mode::kappa;

    const double Lv4 = L(acc_[0], f.v4, p.v4), Cv3 = C(acc_[1], f.v3);
    const double CqC = C(acc_[2], f.qC), LqL = L(acc_[3], f.qL, p.qL);
    const double ChC = C(acc_[4], f.hC), LhL = L(acc_[5], f.hL, p.hL);
    const double ChsC = C(acc_[6], f.hsC), LhsL = L(acc_[7], f.hsL, p.hsL);
    const double Lht4 = L(acc_[8], f.ht4, p.ht4), Cht3 = C(acc_[9], f.ht3);
    const double ClhC = C(acc_[10], f.lhC), LlhL = L(acc_[11], f.lhL, p.lhL);
    const double Lv2 = L(acc_[12], f.v2, p.v2), Cv1 = C(acc_[13], f.v1);
    const double Lht2 = L(acc_[14], f.ht2, p.ht2), Cht1 = C(acc_[15], f.ht1);
    const double CqCl = C(acc_[16], f.qClow), LqLl = L(acc_[17], f.qLlow, p.qLlow);
    const double ClhCl = C(acc_[18], f.lhClow), LlhLl = L(acc_[19], f.lhLlow, p.lhLlow);
    // natural, unsmoothed
    const double Nb4 = C(acc_[20], f.nat.bnd_C4), Nb3 = L(acc_[21], f.nat.bnd_L3, p.nat.bnd_L3);
    const double Nd4 = C(acc_[22], f.nat.div_C4), Nd3 = L(acc_[23], f.nat.div_L3, p.nat.div_L3);
    const double Fs4 = C(acc_[24], f.fsC), Fs3 = L(acc_[25], f.fsL, p.fsL);
    // natural, smoothed
    const double Kh4 = L(acc_[26], f.natk.ht_L4, p.natk.ht_L4), Kh3 = C(acc_[27], f.natk.ht_C3);
    const double Kb4 = C(acc_[28], f.natk.bnd_C4), Kb3 = L(acc_[29], f.natk.bnd_L3, p.natk.bnd_L3);
    const double Kd4 = C(acc_[30], f.natk.div_C4), Kd3 = L(acc_[31], f.natk.div_L3, p.natk.div_L3);
    natural_ok_ = natural_ok_ && f.nat.defined && (!kmode || f.natk.defined);

    EnergyReport r;
    r.t = f.t;
    r.margin = f.margin;
    r.E = Lv4 + Cv3 + CqC + LqL + ChC + LhL;
    r.E_sigma = r.E + sig * ChsC + sig * LhsL + sig * sig * ChC;
    r.F = Lv4 + 0.5 * Cv3 + 0.5 * Nb4 + Nb3 + 0.5 * Nd4 + Nd3;
    r.F_sigma = r.F + 0.5 * sig * Fs4 + sig * Fs3;
    const double nan = std::numeric_limits<double>::quiet_NaN();
    if (kmode) {
      r.E_kappa = Lv4 + Cv3 + kap * Lht4 + kap * Cht3 + CqC + LqL + ClhC + LlhL;
      r.E_kappa_raw = Lv4 + Cv3 + kap * Lht4 + kap * Cht3 + CqC + LqL + ChC + LhL;
      r.A_kappa = Lv2 + Cv1 + kap * Lht2 + kap * Cht1 + CqCl + LqLl + ClhCl + LlhLl;
      r.F_kappa = Lv4 + 0.5 * Cv3 + kap * Kh4 + 0.5 * kap * Kh3 + 0.5 * Kb4 + Kb3 + 0.5 * Kd4 + Kd3;
      if (!has_prev_) E0_ = r.E_kappa;
      r.apriori_ok = r.A_kappa <= E0_ + 1.0;
    } else {
      r.E_kappa = r.E_kappa_raw = r.A_kappa = r.F_kappa = nan;
    }
    r.natural_defined = natural_ok_;
    if (!natural_ok_) {
      r.F = r.F_sigma = nan;
      if (kmode) r.F_kappa = nan;
    }
    prev_ = f;
    has_prev_ = true;
    return r;
  }

 private:
  SolverConfig cfg_;
  std::array<double, 32> acc_{};
  FrameTerms prev_;
  bool has_prev_ = false;
  bool natural_ok_ = true;
  double E0_ = 0.0;
};

/// Energy report at every snapshot of a trajectory.
inline std::vector<EnergyReport> energy_series(const Trajectory& tr) {
  EnergyAccumulator acc(tr.cfg);
  std::vector<EnergyReport> out;
  out.reserve(tr.frames.size());
  for (std::size_t n = 0; n < tr.frames.size(); ++n) out.push_back(acc.add(frame_terms(frame_fields(tr, n), tr.cfg)));
  return out;
}

/// Pointwise identity checks at one state.
struct IdentityReport {
  double curl = 0;       // max |curl_Psi v| over Omega
  double slip = 0;       // max |v . tau| on Gamma
  double curvature = 0;  // relative misfit of h'' = g^2 (dv.tau)/(v.n) where |v.n| >= 0.1 margin
  double ht_mean = 0;    // mean h_t
  double Jqy_mean = 0;   // mean J q_y on Gamma (sign record only)
};

inline IdentityReport geometric_identities(const Field& q, const VectorField& v, const MetricBundle& b) {
  const int nx = q.grid().nx();
  IdentityReport r;
  r.curl = curl_psi(v, b).max_abs();
  BoundaryField vt(nx), vn(nx);
  for (int i = 0; i < nx; ++i) {
    vt[i] = v[0](i, 0) * b.tau1[i] + v[1](i, 0) * b.tau2[i];
    vn[i] = v[0](i, 0) * b.n1[i] + v[1](i, 0) * b.n2[i];
  }
  r.slip = vt.max_abs();
  // d(v.tau) along x of the trace of v, then dotted with tau
  VectorField dv(q.grid());
  dv[0] = tangential_derivative(v[0], 1);
  dv[1] = tangential_derivative(v[1], 1);
  BoundaryField h2 = tangential_derivative(b.map.h, 2);
  const double margin = taylor_margin(q);
  double mis = 0.0;
  for (int i = 0; i < nx; ++i) {
    if (std::abs(vn[i]) < 0.1 * std::abs(margin)) continue;
    const double dvt = dv[0](i, 0) * b.tau1[i] + dv[1](i, 0) * b.tau2[i];
    mis = std::max(mis, std::abs(h2[i] - b.g[i] * b.g[i] * dvt / vn[i]));
  }
  const double scale = h2.max_abs();
  r.curvature = scale > 0.0 ? mis / scale : mis;
  BoundaryField ht = height_rate(v, b), qy = bottom_dy(q);
  for (int i = 0; i < nx; ++i) {
    r.ht_mean += ht[i] / nx;
    r.Jqy_mean += b.J(i, 0) * qy[i] / nx;
  }
  return r;
}

/// (1/2) int q^2 J and int |grad_Psi q|^2 J at one state.
inline std::pair<double, double> dissipation_terms(const Field& q, const VectorField& v, const MetricBundle& b) {
  const Grid& g = q.grid();
  Field e(g), d(g);
  for (std::size_t k = 0; k < e.size(); ++k) {
    e[k] = 0.5 * q[k] * q[k] * b.J[k];
    d[k] = (v[0][k] * v[0][k] + v[1][k] * v[1][k]) * b.J[k];
  }
  return {integrate(e), integrate(d)};
}

/// |dE/dt + D| / D by centered differences on an equally spaced sequence;
/// entry n belongs to sample n + 1.
inline std::vector<double> dissipation_defects(const std::vector<double>& E, const std::vector<double>& D, double dt) {
  std::vector<double> out;
  for (std::size_t n = 1; n + 1 < E.size(); ++n) {
    const double dE = (E[n + 1] - E[n - 1]) / (2.0 * dt);
    out.push_back(D[n] > 0.0 ? std::abs(dE + D[n]) / D[n] : std::abs(dE));
  }
  return out;
}

/// Normalized defect of (1/2) d/dt int q^2 J + int |grad_Psi q|^2 J = 0 at every
/// interior snapshot (classical, sigma = 0 only).
inline std::vector<double> dissipation_residual(const Trajectory& tr) {
  if (tr.cfg.mode != Mode::classical || tr.cfg.sigma != 0.0)
    throw Error(ErrorKind::usage, "dissipation law holds for the classical problem only");
  const auto& F = tr.frames;
  if (F.size() < 3) throw Error(ErrorKind::needs_more_steps, "dissipation check needs three snapshots");
  std::vector<double> E(F.size()), D(F.size());
  for (std::size_t n = 0; n < F.size(); ++n)
    std::tie(E[n], D[n]) = dissipation_terms(F[n].q, F[n].v, metric_bundle(extend_displacement(F[n].h, tr.cfg.grid)));
  return dissipation_defects(E, D, tr.spacing());
}

/// max_t,x (|q| + |q_t| + |grad q| + |grad^2 q|) + max_t,x (|h| + |h_t| + |h'| + |h''|)
/// of the difference of two trajectories on identical grids and times.
inline double mixed_cnorm(const Trajectory& a, const Trajectory& b) {
  if (!(a.cfg.grid == b.cfg.grid) || a.frames.size() != b.frames.size())
    throw Error(ErrorKind::usage, "trajectories differ in grid or snapshot count");
  for (std::size_t n = 0; n < a.frames.size(); ++n)
    if (std::abs(a.frames[n].t - b.frames[n].t) > 1e-12) throw Error(ErrorKind::usage, "snapshot times differ");
  const std::size_t N = a.frames.size();
  if (N < 3) throw Error(ErrorKind::needs_more_steps, "need three snapshots");
  std::vector<Field> dq;
  std::vector<BoundaryField> dh;
  for (std::size_t n = 0; n < N; ++n) {
    dq.push_back(a.frames[n].q - b.frames[n].q);
    dh.push_back(a.frames[n].h - b.frames[n].h);
  }
  std::vector<const Field*> pq;
  std::vector<const BoundaryField*> ph;
  for (std::size_t n = 0; n < N; ++n) {
    pq.push_back(&dq[n]);
    ph.push_back(&dh[n]);
  }
  const double d = a.spacing();
  double mq = 0.0, mh = 0.0;
  for (std::size_t n = 0; n < N; ++n) {
    Field qt = fd_time_derivative(pq, d, n, 1);
    Gradient2 D = derivatives_to_second(dq[n]);
    for (std::size_t k = 0; k < qt.size(); ++k) {
      const double grad = std::hypot(D.d1[k], D.d2[k]);
      const double hess = std::sqrt(D.d11[k] * D.d11[k] + 2 * D.d12[k] * D.d12[k] + D.d22[k] * D.d22[k]);
      mq = std::max(mq, std::abs(dq[n][k]) + std::abs(qt[k]) + grad + hess);
    }
    BoundaryField ht = fd_time_derivative(ph, d, n, 1);
    BoundaryField h1 = tangential_derivative(dh[n], 1), h2 = tangential_derivative(dh[n], 2);
    for (int i = 0; i < dh[n].nx(); ++i)
      mh = std::max(mh, std::abs(dh[n][i]) + std::abs(ht[i]) + std::abs(h1[i]) + std::abs(h2[i]));
  }
  return mq + mh;
}

}  // namespace stefan
