#include <CLI11.hpp>
#include <json.hpp>

#include <capillary/bernstein.hpp>
#include <capillary/foliation.hpp>
#include <capillary/minmax.hpp>
#include <capillary/oracles.hpp>
#include <capillary/shapes.hpp>
#include <capillary/solver.hpp>
#include <capillary/stability.hpp>

#include <filesystem>
#include <fstream>
#include <iomanip>
#include <iostream>
#include <random>
#include <sstream>

using namespace capillary;
using nlohmann::json;
namespace fs = std::filesystem;

namespace {

std::string num(double x) {
  std::ostringstream os;
  os << std::setprecision(12) << x;
  return os.str();
}

// 12 significant digits, so reports do not depend on the last few bits
double round12(double x) {
  if (!std::isfinite(x)) return x;
  return std::stod(num(x));
}

struct Common {
  std::string config;
  std::string domain = "halfspace";
  double slabHeight = 1.0;
  double theta = M_PI / 2;
  double c = 0.0;
  std::string out = ".";
  uint64_t seed = 1;
  int jobs = 1;
};

struct SolveArgs {
  double seedCap = 1.0;
  int level = 4;
  double perturb = 0.0;
  std::string mesh;
  int maxIter = 5000;
  double tolGrad = 0.0;  // 0: 0.8 h^4
};

struct StabilityArgs {
  int modes = 6;
  bool volumePreserving = false;
  bool quotientTranslations = false;
  bool relaxFirst = true;
};

struct MinmaxArgs {
  int grid = 64;
  int nodes = 33;
  std::string sweep = "height";
  int outerIters = 40;
  int innerSteps = 3;
  bool noReparam = false;
};

struct ConstantsArgs {
  int n = 3;
  int thetaGrid = 64;
  double q = 0.0;
  double a = 1.0;
  double b = 1.0;
};

struct BarrierArgs {
  double sMin = 0.05;
  double sMax = 0.0;  // 0: up to the barrier scale
  int sSteps = 10;
  int gammaSteps = 9;
  double mu = -1;
};

AmbientDomain makeDomain(const Common& g) {
  if (g.domain == "halfspace") return AmbientDomain::halfSpace();
  if (g.domain == "ball") return AmbientDomain::unitBall();
  if (g.domain == "slab") return AmbientDomain::slab(g.slabHeight);
  throw Error(ErrorCode::InvalidArgument, "unknown domain '" + g.domain + "'");
}

EnergyParams makeParams(const Common& g) {
  EnergyParams p;
  p.theta = g.theta;
  p.c = g.c;
  p.validate();
  return p;
}

void writeJson(const fs::path& path, const json& j) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  f << j.dump(2) << '\n';
}

std::ofstream openCsv(const fs::path& path, const std::string& header) {
  std::ofstream f(path);
  if (!f) throw Error(ErrorCode::InvalidArgument, "cannot write " + path.string());
  f << header << '\n';
  return f;
}

// Radial 5% bumps keep the wall loop on the wall.
CapillaryMesh perturbed(CapillaryMesh m, const AmbientDomain& d, double amp, uint64_t seed) {
  if (amp <= 0) return m;
  std::mt19937_64 rng(seed);
  std::uniform_real_distribution<double> U(-1, 1);
  Vec3 centre = Vec3::Zero();
  for (auto& v : m.vertices) centre += v;
  centre /= m.vertexCount();
  for (int i = 0; i < m.vertexCount(); ++i) {
    Vec3 r = m.vertices[i] - centre;
    m.vertices[i] += amp * U(rng) * r;
    if (m.wall[i] >= 0) m.vertices[i] = d.projectToWall(m.wall[i], m.vertices[i]);
  }
  finalize(m, d);
  return m;
}

CapillaryMesh seedMesh(const Common& g, const SolveArgs& s, const AmbientDomain& d) {
  if (!s.mesh.empty()) return readOFF(s.mesh, d);
  require(s.level >= 1 && s.level <= 7, "mesh level must lie in 1..7");
  CapillaryMesh m;
  if (d.kind() == DomainKind::UnitBall) m = makeFlatDiskInBall(s.level);
  else m = makeSphericalCap(g.theta, s.seedCap, s.level);
  return perturbed(m, d, s.perturb, g.seed);
}

std::vector<Vec3> probePoints(const CapillaryMesh& m) {
  std::vector<Vec3> pts;
  if (!m.topo->loops.empty() && !m.topo->loops[0].empty()) pts.push_back(m.vertices[m.topo->loops[0][0]]);
  // the interior vertex farthest from the boundary
  int far = -1;
  double best = -1;
  for (int i = 0; i < m.vertexCount(); ++i) {
    if (m.topo->topoBoundary[i]) continue;
    double dmin = INFINITY;
    for (auto& loop : m.topo->loops)
      for (int v : loop) dmin = std::min(dmin, (m.vertices[i] - m.vertices[v]).norm());
    if (dmin > best) {
      best = dmin;
      far = i;
    }
  }
  if (far >= 0) pts.push_back(m.vertices[far]);
  return pts;
}

double defaultTol(const CapillaryMesh& m) {
  double h = meanEdgeLength(m);
  return 0.8 * h * h * h * h;
}

int runSolve(const Common& g, const SolveArgs& s) {
  AmbientDomain d = makeDomain(g);
  EnergyParams p = makeParams(g);
  CapillaryMesh m = seedMesh(g, s, d);
  RelaxOptions o;
  o.maxIter = s.maxIter;
  o.tolGrad = s.tolGrad > 0 ? s.tolGrad : defaultTol(m);
  SolveReport r = relax(m, d, p, o);
  ResidualReport res = residuals(r.finalMesh, d, p, probePoints(r.finalMesh));
  json j;
  j["command"] = "solve";
  j["finalEnergy"] = round12(r.finalEnergy);
  j["gradNorm"] = round12(r.gradientNorm);
  j["hResidual"] = round12(res.maxMeanCurvatureResidual);
  j["angleResidual"] = round12(res.maxAngleResidual);
  j["densityClasses"] = json::array();
  for (auto& pr : res.probes) j["densityClasses"].push_back(densityClassName(pr.cls));
  j["densityMonotone"] = res.monotone;
  j["converged"] = r.converged;
  j["iterations"] = r.iterations;
  j["multiplierMode"] = r.multiplierMode;
  j["escapedSaddle"] = r.escapedSaddle;
  writeJson(fs::path(g.out) / "report.json", j);
  writeOFF(r.finalMesh, (fs::path(g.out) / "solution.off").string());
  std::cout << "energy " << num(r.finalEnergy) << " hResidual " << num(res.maxMeanCurvatureResidual)
            << " angleResidual " << num(res.maxAngleResidual) << '\n';
  return 0;
}

int runStability(const Common& g, const SolveArgs& s, const StabilityArgs& a) {
  AmbientDomain d = makeDomain(g);
  EnergyParams p = makeParams(g);
  CapillaryMesh m = seedMesh(g, s, d);
  if (a.relaxFirst && s.mesh.empty()) {
    RelaxOptions o;
    o.maxIter = s.maxIter;
    o.tolGrad = s.tolGrad > 0 ? s.tolGrad : defaultTol(m);
    m = relax(m, d, p, o).finalMesh;
  }
  JacobiForm J = jacobiForm(m, d, p);
  SpectrumOptions so;
  so.seed = g.seed;
  if (a.volumePreserving) so.mode = SpectrumOptions::Mode::VolumePreserving;
  if (a.quotientTranslations) so.constraints = translationFields(m);
  SpectrumReport rep = spectrum(J, a.modes, so);
  auto csv = openCsv(fs::path(g.out) / "stability.csv", "index,eigenvalue");
  for (size_t k = 0; k < rep.eigenvalues.size(); ++k) csv << k << ',' << num(rep.eigenvalues[k]) << '\n';
  json j;
  j["command"] = "stability";
  j["morseIndex"] = rep.morseIndex;
  j["indexSaturated"] = rep.indexSaturated;
  j["eigenvalues"] = json::array();
  for (double l : rep.eigenvalues) j["eigenvalues"].push_back(round12(l));
  j["critical"] = J.critical;
  writeJson(fs::path(g.out) / "report.json", j);
  std::cout << "morseIndex " << rep.morseIndex << " lambda1 " << num(rep.eigenvalues.empty() ? 0 : rep.eigenvalues[0]) << '\n';
  return 0;
}

int runMinmax(const Common& g, const MinmaxArgs& a) {
  AmbientDomain d = makeDomain(g);
  EnergyParams p = makeParams(g);
  require(a.grid >= 8 && a.grid <= 128, "grid must lie in 8..128");
  VoxelRegion grid = d.kind() == DomainKind::UnitBall ? VoxelRegion::ballGrid(a.grid)
                                                       : detail::smallVolumeGrid(d, a.grid);
  Sweepout sw = sweepFromMorse(grid, parseHeightFunction(a.sweep), a.nodes);
  MountainPassOptions o;
  o.outerIters = a.outerIters;
  o.innerSteps = a.innerSteps;
  o.reparam = !a.noReparam;
  o.jobs = g.jobs;
  MinMaxReport rep = mountainPass(sw, p, o);
  auto csv = openCsv(fs::path(g.out) / "history.csv", "iter,width,argmax");
  for (auto& h : rep.history) csv << h.iter << ',' << num(h.width) << ',' << h.argmax << '\n';
  writeOFF(rep.extractedMesh, (fs::path(g.out) / "critical.off").string());
  writeCapreg(rep.criticalRegion, (fs::path(g.out) / "critical.capreg").string());
  json j;
  j["command"] = "minmax";
  j["width"] = round12(rep.width);
  j["argmaxIndex"] = rep.argmaxIndex;
  j["hResidual"] = round12(rep.residuals.maxMeanCurvatureResidual);
  j["angleResidual"] = round12(rep.residuals.maxAngleResidual);
  j["morseIndex"] = rep.morseIndex;
  j["lambda1"] = round12(rep.lambda1);
  j["stationaryThreshold"] = round12(rep.stationaryThreshold);
  j["fixedNodes"] = rep.fixedNodes;
  j["endpointEnergy"] = round12(rep.endEnergy);
  writeJson(fs::path(g.out) / "report.json", j);
  std::cout << "width " << num(rep.width) << " argmax " << rep.argmaxIndex << " morseIndex " << rep.morseIndex << '\n';
  return 0;
}

int runConstants(const Common& g, const ConstantsArgs& a) {
  require(a.thetaGrid >= 2, "theta grid needs at least two intervals");
  AdmissibleRange range = admissibleRange(a.n);
  auto csv = openCsv(fs::path(g.out) / "constants.csv", "theta,Ctheta,cNtheta,B,admissible");
  json rows = json::array();
  for (int k = 1; k < a.thetaGrid; ++k) {
    double th = M_PI * k / a.thetaGrid;
    SSYInput in;
    in.n = a.n;
    in.theta = th;
    in.q = a.q;
    in.a = a.a;
    in.b = a.b;
    SSYConstants c = constants(in);
    bool ok = th > range.thetaInterval.first && th < range.thetaInterval.second;
    csv << num(th) << ',' << num(c.Ctheta) << ',' << num(c.cNtheta) << ',' << num(c.B) << ',' << (ok ? 1 : 0) << '\n';
  }
  json j;
  j["command"] = "constants";
  j["n"] = a.n;
  j["thetaInterval"] = {round12(range.thetaInterval.first), round12(range.thetaInterval.second)};
  if (range.cThreshold) j["cThreshold"] = round12(*range.cThreshold);
  j["witness"] = {{"q", round12(range.witness.q)}, {"a", range.witness.a}, {"b", range.witness.b},
                  {"B", round12(range.witness.B)}};
  writeJson(fs::path(g.out) / "report.json", j);
  std::cout << "admissible (" << num(range.thetaInterval.first) << ", " << num(range.thetaInterval.second) << ")\n";
  return 0;
}

int runBarrier(const Common& g, const BarrierArgs& a) {
  EnergyParams p = makeParams(g);
  double mu = a.mu < 0 ? defaultMu(p.theta) : a.mu;
  double sStar = barrierScale(p, mu);
  double sMax = a.sMax > 0 ? a.sMax : sStar;
  require(a.sMin > 0 && a.sMin <= sMax && a.sSteps >= 1 && a.gammaSteps >= 2, "bad barrier grid");
  auto csv = openCsv(fs::path(g.out) / "barrier.csv", "s,gamma,alpha,hBound,maxAngle");
  bool ordered = true, anglesOk = true;
  for (int i = 0; i <= a.sSteps; ++i) {
    double s = a.sSteps == 0 ? a.sMin : a.sMin + (sMax - a.sMin) * i / a.sSteps;
    for (int k = 0; k < a.gammaSteps; ++k) {
      double gamma = p.theta + (M_PI / 2 - p.theta) * k / (a.gammaSteps - 1);
      Barrier b = capBarrier(s, gamma, mu, Vec3::Zero(), p);
      BarrierReport r = barrierReport(b, p);
      ordered = ordered && r.foliationOrdered;
      anglesOk = anglesOk && r.maxContactAngle <= gamma + 1e-12;
      csv << num(s) << ',' << num(gamma) << ',' << num(b.alphaGamma) << ',' << num(b.hBound) << ','
          << num(r.maxContactAngle) << '\n';
    }
  }
  json j;
  j["command"] = "barrier";
  j["mu"] = round12(mu);
  j["sStar"] = round12(sStar);
  j["foliationOrdered"] = ordered;
  j["contactAngleBelowGamma"] = anglesOk;
  writeJson(fs::path(g.out) / "report.json", j);
  std::cout << "sStar " << num(sStar) << " ordered " << ordered << '\n';
  return 0;
}

// A fast self-check of the closed-form pieces.
int runVerify(const Common& g) {
  json j;
  j["command"] = "verify";
  bool all = true;
  auto record = [&](const std::string& name, bool ok, double value) {
    j["checks"][name] = {{"pass", ok}, {"value", round12(value)}};
    std::cout << (ok ? "PASS " : "FAIL ") << name << ' ' << num(value) << '\n';
    all = all && ok;
  };
  {
    CapillaryMesh m = makeSphericalCap(M_PI / 3, 1.0, 4);
    EnergyParams p{2.0, M_PI / 3};
    double e = capillaryEnergy(m, AmbientDomain::halfSpace(), p);
    double ref = capEnergy(M_PI / 3, 1.0, 2.0);
    record("capEnergy", std::abs(e - ref) <= 0.01 * std::abs(ref), e / ref - 1);
  }
  {
    CapillaryMesh m = makeFlatDiskInBall(3);
    // away from criticality, so the derivative is not close to zero
    EnergyParams p{0.5, M_PI / 3};
    AmbientDomain d = AmbientDomain::unitBall();
    std::mt19937_64 rng(g.seed);
    std::normal_distribution<double> N;
    std::vector<Vec3> X(m.vertexCount());
    for (auto& x : X) x = Vec3(N(rng), N(rng), N(rng));
    for (int i = 0; i < m.vertexCount(); ++i)
      if (m.wall[i] >= 0) {
        Vec3 n = d.wallNormal(m.wall[i], m.vertices[i]);
        X[i] -= X[i].dot(n) * n;
      }
    double an = firstVariation(m, d, p, X);
    const double t = 1e-5;
    CapillaryMesh a = m, b = m;
    for (int i = 0; i < m.vertexCount(); ++i) {
      a.vertices[i] += t * X[i];
      b.vertices[i] -= t * X[i];
    }
    double fd = (capillaryEnergy(a, d, p) - capillaryEnergy(b, d, p)) / (2 * t);
    double rel = std::abs(an - fd) / std::max(1e-12, std::abs(fd));
    record("firstVariation", rel <= 1e-5, rel);
  }
  {
    Rational B = ssyBRightAngle(3, Rational(0), Rational(1), Rational(1));
    record("ssyRightAngle", B == Rational(2, 3), boost::rational_cast<double>(B));
  }
  {
    EnergyParams p{2.0, M_PI / 3};
    Barrier b = capBarrier(0.1, M_PI / 2, defaultMu(p.theta), Vec3::Zero(), p);
    record("hemisphereBarrier", std::abs(b.hBound - 20) < 1e-9, b.hBound);
  }
  j["pass"] = all;
  writeJson(fs::path(g.out) / "report.json", j);
  return all ? 0 : 3;
}

// key = value lines; keys are long flag names of the chosen subcommand or of the app
void applyConfig(CLI::App& app, CLI::App* sub, const std::string& path) {
  std::ifstream f(path);
  if (!f) throw Error(ErrorCode::ConfigParse, "cannot read config " + path);
  std::string line;
  int lineNo = 0;
  while (std::getline(f, line)) {
    ++lineNo;
    if (auto h = line.find('#'); h != std::string::npos) line.erase(h);
    auto trim = [](std::string s) {
      s.erase(0, s.find_first_not_of(" \t\r"));
      s.erase(s.find_last_not_of(" \t\r") + 1);
      return s;
    };
    line = trim(line);
    if (line.empty()) continue;
    auto eq = line.find('=');
    if (eq == std::string::npos)
      throw Error(ErrorCode::ConfigParse, path + ":" + std::to_string(lineNo) + ": expected key=value");
    std::string key = trim(line.substr(0, eq)), value = trim(line.substr(eq + 1));
    CLI::Option* opt = sub ? sub->get_option_no_throw("--" + key) : nullptr;
    if (!opt) opt = app.get_option_no_throw("--" + key);
    if (!opt) throw Error(ErrorCode::ConfigParse, path + ":" + std::to_string(lineNo) + ": unknown key '" + key + "'");
    if (opt->count() > 0) continue;  // flags win
    opt->add_result(value);
    try {
      opt->run_callback();
    } catch (const CLI::Error& e) {
      throw Error(ErrorCode::ConfigParse, path + ":" + std::to_string(lineNo) + ": " + e.what());
    }
  }
}

}  // namespace

int main(int argc, char** argv) {
  CLI::App app{"capillary surfaces: relaxation, stability, min-max and barriers"};
  app.fallthrough();  // global flags may follow the subcommand
  app.require_subcommand(1);
  Common g;
  app.add_option("--config", g.config, "key=value file; flags override it");
  app.add_option("--domain", g.domain, "halfspace, ball or slab");
  app.add_option("--slab-height", g.slabHeight, "slab height");
  app.add_option("--theta", g.theta, "contact angle in radians");
  app.add_option("--c", g.c, "mean curvature constant");
  app.add_option("--out", g.out, "output directory");
  app.add_option("--seed", g.seed, "random seed");
  app.add_option("--jobs", g.jobs, "worker threads")->check(CLI::PositiveNumber);

  SolveArgs sa;
  auto addMeshOptions = [&](CLI::App* s) {
    s->add_option("--seed-cap", sa.seedCap, "radius of the initial cap");
    s->add_option("--level", sa.level, "mesh refinement level (<= 7)");
    s->add_option("--perturb", sa.perturb, "relative radial perturbation of the seed");
    s->add_option("--mesh", sa.mesh, "start from an OFF mesh instead");
    s->add_option("--max-iter", sa.maxIter, "relaxation iteration cap");
    s->add_option("--tol-grad", sa.tolGrad, "gradient tolerance (default 0.8 h^4)");
  };
  auto* solve = app.add_subcommand("solve", "relax a capillary surface");
  addMeshOptions(solve);

  StabilityArgs st;
  auto* stab = app.add_subcommand("stability", "Jacobi spectrum of a relaxed surface");
  addMeshOptions(stab);
  stab->add_option("--modes", st.modes, "eigenvalues to compute");
  stab->add_flag("--volume-preserving", st.volumePreserving, "restrict to zero-mean variations");
  stab->add_flag("--quotient-translations", st.quotientTranslations, "also remove wall translations");
  stab->add_flag("!--no-relax", st.relaxFirst, "use the seed mesh as is");

  MinmaxArgs mm;
  auto* minmax = app.add_subcommand("minmax", "mountain-pass width on a voxel grid");
  minmax->add_option("--grid", mm.grid, "cells per side (<= 128)");
  minmax->add_option("--nodes", mm.nodes, "sweepout nodes");
  minmax->add_option("--sweep", mm.sweep, "height or wallpoint");
  minmax->add_option("--outer-iters", mm.outerIters, "outer iterations");
  minmax->add_option("--inner-steps", mm.innerSteps, "relaxed descent steps per node");
  minmax->add_flag("--no-reparam", mm.noReparam, "skip flat-distance reparametrization");

  ConstantsArgs ca;
  auto* cons = app.add_subcommand("constants", "stable Bernstein constants on a theta grid");
  cons->add_option("--n", ca.n, "dimension of the hypersurface");
  cons->add_option("--theta-grid", ca.thetaGrid, "theta intervals over (0, pi)");
  cons->add_option("--q", ca.q, "q");
  cons->add_option("--a", ca.a, "a");
  cons->add_option("--b", ca.b, "b");

  BarrierArgs ba;
  auto* bar = app.add_subcommand("barrier", "spherical-cap barrier foliation");
  bar->add_option("--s-min", ba.sMin, "smallest radius");
  bar->add_option("--s-max", ba.sMax, "largest radius (default: barrier scale)");
  bar->add_option("--s-steps", ba.sSteps, "radius intervals");
  bar->add_option("--gamma-steps", ba.gammaSteps, "gamma samples");
  bar->add_option("--mu", ba.mu, "foliation parameter (default a quarter of its range)");

  auto* verify = app.add_subcommand("verify", "quick closed-form self-check");

  try {
    app.parse(argc, argv);
  } catch (const CLI::ParseError& e) {
    return app.exit(e) == 0 ? 0 : 2;
  }

  try {
    CLI::App* sub = app.get_subcommands().front();
    if (!g.config.empty()) applyConfig(app, sub, g.config);
    fs::create_directories(g.out);
    if (sub == solve) return runSolve(g, sa);
    if (sub == stab) return runStability(g, sa, st);
    if (sub == minmax) return runMinmax(g, mm);
    if (sub == cons) return runConstants(g, ca);
    if (sub == bar) return runBarrier(g, ba);
    if (sub == verify) return runVerify(g);
  } catch (const Error& e) {
    std::cerr << "error: " << e.what() << '\n';
    json j;
    j["error"] = errorName(e.code());
    j["message"] = e.what();
    try {
      writeJson(fs::path(g.out) / "report.json", j);
    } catch (...) {
    }
    return isValidationError(e.code()) ? 2 : 3;
  } catch (const std::exception& e) {
    std::cerr << "error: " << e.what() << '\n';
    return 3;
  }
  return 0;
}
