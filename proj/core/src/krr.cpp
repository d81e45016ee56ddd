#include "sensauth/krr.hpp"

#include <Eigen/Cholesky>
#include <Eigen/QR>
#include <nlohmann/json.hpp>

#include <cmath>
#include <iostream>

namespace sensauth {

Standardizer Standardizer::fit(const Eigen::MatrixXd& X) {
  Standardizer s;
  const double n = static_cast<double>(X.cols());
  s.mean = X.rowwise().mean();
  s.scale = ((X.colwise() - s.mean).array().square().rowwise().sum() / n)
                .sqrt()
                .matrix();
  for (Eigen::Index i = 0; i < s.scale.size(); ++i) {
    if (s.scale[i] <= 0.0) s.scale[i] = 1.0;
  }
  return s;
}

Eigen::VectorXd Standardizer::apply(const Eigen::VectorXd& x) const {
  if (x.size() != mean.size()) {
    throw ValidationError("x: dimension mismatch with standardizer");
  }
  return (x - mean).cwiseQuotient(scale);
}

Eigen::MatrixXd Standardizer::apply_columns(const Eigen::MatrixXd& X) const {
  if (X.rows() != mean.size()) {
    throw ValidationError("X: dimension mismatch with standardizer");
  }
  return scale.cwiseInverse().asDiagonal() * (X.colwise() - mean);
}

void TrainingSet::validate() const {
  if (X.cols() < 2) throw ValidationError("X: need N >= 2 examples");
  if (y.size() != X.cols()) {
    throw ValidationError("y: size mismatch with X columns");
  }
  if (!X.allFinite()) throw ValidationError("X: non-finite entry");
  bool pos = false;
  bool neg = false;
  for (Eigen::Index i = 0; i < y.size(); ++i) {
    if (y[i] == 1.0) {
      pos = true;
    } else if (y[i] == -1.0) {
      neg = true;
    } else {
      throw ValidationError("y: labels must be +1 or -1");
    }
  }
  if (!pos || !neg) throw ValidationError("y: both classes must be present");
}

std::string_view to_string(Solver s) {
  return s == Solver::Primal ? "primal" : "dual";
}

namespace {

void check_rho(double rho) {
  if (!(rho > 0.0) || !std::isfinite(rho)) {
    throw ValidationError("rho: must be positive and finite");
  }
}

AuthModel make_model(Eigen::VectorXd w, double rho, Solver solver,
                     Eigen::Index n_train) {
  AuthModel m;
  m.w = std::move(w);
  m.rho = rho;
  m.meta.solver = solver;
  m.meta.n_train = static_cast<int>(n_train);
  return m;
}

}  // namespace

AuthModel train_primal(const TrainingSet& ts, double rho) {
  check_rho(rho);
  ts.validate();
  const Eigen::Index m = ts.X.rows();

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(m, m);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(ts.X);
  gram.diagonal().array() += rho;

  const Eigen::VectorXd xy = ts.X * ts.y;
  const Eigen::LLT<Eigen::MatrixXd> llt(gram.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success) {
    throw ValidationError("X: primal system is not positive definite");
  }
  return make_model(llt.solve(xy), rho, Solver::Primal, ts.X.cols());
}

AuthModel train_dual(const TrainingSet& ts, double rho) {
  check_rho(rho);
  ts.validate();
  const Eigen::Index n = ts.X.cols();

  Eigen::MatrixXd gram = Eigen::MatrixXd::Zero(n, n);
  gram.selfadjointView<Eigen::Lower>().rankUpdate(ts.X.transpose());
  gram.diagonal().array() += rho;

  const Eigen::LLT<Eigen::MatrixXd> llt(gram.selfadjointView<Eigen::Lower>());
  if (llt.info() != Eigen::Success) {
    throw ValidationError("X: dual system is not positive definite");
  }
  return make_model(ts.X * llt.solve(ts.y), rho, Solver::Dual, n);
}

AuthModel train_auth(const TrainingSet& ts, double rho, Solver solver) {
  return solver == Solver::Primal ? train_primal(ts, rho)
                                  : train_dual(ts, rho);
}

AuthModel fit_auth_model(const Eigen::MatrixXd& legit,
                         const Eigen::MatrixXd& impostors, double rho,
                         ContextLabel context, LayoutKind layout,
                         Solver solver) {
  if (legit.cols() < 2 || impostors.cols() < 1) {
    throw ValidationError("training data: need >= 2 legit and >= 1 impostor vectors");
  }
  if (legit.rows() != impostors.rows()) {
    throw ValidationError("training data: dimension mismatch");
  }

  Eigen::MatrixXd imp = impostors;
  if (imp.cols() > legit.cols()) {
    Eigen::MatrixXd sub(imp.rows(), legit.cols());
    for (Eigen::Index i = 0; i < legit.cols(); ++i) {
      sub.col(i) = imp.col(i * imp.cols() / legit.cols());
    }
    imp = std::move(sub);
  }

  TrainingSet raw;
  raw.X.resize(legit.rows(), legit.cols() + imp.cols());
  raw.X << legit, imp;
  raw.y.resize(legit.cols() + imp.cols());
  raw.y.head(legit.cols()).setConstant(1.0);
  raw.y.tail(imp.cols()).setConstant(-1.0);

  const Standardizer norm = Standardizer::fit(raw.X);
  TrainingSet zs{norm.apply_columns(raw.X), raw.y};
  AuthModel model = train_auth(zs, rho, solver);
  model.norm = norm;
  model.context = context;
  model.layout = layout;
  return model;
}

double ridge_objective(const TrainingSet& ts, double rho,
                       const Eigen::VectorXd& w) {
  return rho * w.squaredNorm() + (ts.X.transpose() * w - ts.y).squaredNorm();
}

Eigen::VectorXd ridge_gradient(const TrainingSet& ts, double rho,
                               const Eigen::VectorXd& w) {
  return 2.0 * rho * w + 2.0 * (ts.X * (ts.X.transpose() * w - ts.y));
}

double AuthModel::score(const Eigen::VectorXd& x) const {
  const Eigen::VectorXd z = norm ? norm->apply(x) : x;
  if (z.size() != w.size()) {
    throw ValidationError("x: dimension mismatch with model layout");
  }
  const double cs = w.dot(z);
  if (!std::isfinite(cs)) throw ValidationError("x: non-finite score");
  return cs;
}

bool AuthModel::classify(const Eigen::VectorXd& x, double threshold) const {
  return score(x) > threshold;
}

namespace {

nlohmann::json vector_to_json(const Eigen::VectorXd& v) {
  nlohmann::json j = nlohmann::json::array();
  for (Eigen::Index i = 0; i < v.size(); ++i) j.push_back(v[i]);
  return j;
}

Eigen::VectorXd vector_from_json(const nlohmann::json& j) {
  Eigen::VectorXd v(static_cast<Eigen::Index>(j.size()));
  Eigen::Index i = 0;
  for (const auto& e : j) v[i++] = e.get<double>();
  return v;
}

constexpr int kAuthSchemaVersion = 1;

LayoutKind layout_from_name(const std::string& name) {
  if (name == "phone14") return LayoutKind::Phone14;
  if (name == "watch14") return LayoutKind::Watch14;
  if (name == "combined28") return LayoutKind::Combined28;
  if (name == "phone_candidate18") return LayoutKind::PhoneCandidate18;
  if (name == "watch_candidate18") return LayoutKind::WatchCandidate18;
  if (name == "combined_candidate36") return LayoutKind::CombinedCandidate36;
  throw ValidationError("layout: unknown value '" + name + "'");
}

std::string layout_name(LayoutKind k) {
  switch (k) {
    case LayoutKind::Phone14: return "phone14";
    case LayoutKind::Watch14: return "watch14";
    case LayoutKind::Combined28: return "combined28";
    case LayoutKind::PhoneCandidate18: return "phone_candidate18";
    case LayoutKind::WatchCandidate18: return "watch_candidate18";
    case LayoutKind::CombinedCandidate36: return "combined_candidate36";
  }
  throw ValidationError("layout: unknown kind");
}

}  // namespace

std::string AuthModel::to_json_string() const {
  nlohmann::json j;
  j["schema_version"] = kAuthSchemaVersion;
  j["type"] = "auth_model";
  j["w"] = vector_to_json(w);
  j["rho"] = rho;
  j["context"] = std::string(to_string(context));
  j["layout"] = layout_name(layout);
  if (norm) {
    j["norm"] = {{"mean", vector_to_json(norm->mean)},
                 {"scale", vector_to_json(norm->scale)}};
  }
  j["meta"] = {{"n_train", meta.n_train},
               {"solver", std::string(to_string(meta.solver))},
               {"version", meta.version},
               {"trained_at", meta.trained_at}};
  return j.dump();
}

AuthModel AuthModel::from_json_string(const std::string& text) {
  const auto j = nlohmann::json::parse(text);
  const int version = j.at("schema_version").get<int>();
  if (version > kAuthSchemaVersion) {
    throw ValidationError("schema_version: model written by a newer major (" +
                          std::to_string(version) + ")");
  }
  if (j.at("type").get<std::string>() != "auth_model") {
    throw ValidationError("type: expected auth_model");
  }
  AuthModel m;
  m.w = vector_from_json(j.at("w"));
  m.rho = j.at("rho").get<double>();
  m.context = context_from_string(j.at("context").get<std::string>());
  m.layout = layout_from_name(j.at("layout").get<std::string>());
  if (j.contains("norm")) {
    Standardizer s;
    s.mean = vector_from_json(j.at("norm").at("mean"));
    s.scale = vector_from_json(j.at("norm").at("scale"));
    m.norm = std::move(s);
  }
  const auto& meta = j.at("meta");
  m.meta.n_train = meta.at("n_train").get<int>();
  m.meta.solver = meta.at("solver").get<std::string>() == "dual"
                      ? Solver::Dual
                      : Solver::Primal;
  m.meta.version = meta.at("version").get<int>();
  m.meta.trained_at = meta.value("trained_at", std::string{});
  return m;
}

LinearRegressionModel train_linreg(const TrainingSet& ts) {
  ts.validate();
  // Minimum-norm solution of X^T w = y via a rank-revealing decomposition.
  Eigen::CompleteOrthogonalDecomposition<Eigen::MatrixXd> cod(
      ts.X.transpose());
  return {cod.solve(ts.y)};
}

GaussianNbModel train_gnb(const TrainingSet& ts) {
  ts.validate();
  const Eigen::Index m = ts.X.rows();

  GaussianNbModel model;
  model.mean_pos = Eigen::VectorXd::Zero(m);
  model.mean_neg = Eigen::VectorXd::Zero(m);
  model.var_pos = Eigen::VectorXd::Zero(m);
  model.var_neg = Eigen::VectorXd::Zero(m);

  std::size_t n_pos = 0;
  std::size_t n_neg = 0;
  for (Eigen::Index i = 0; i < ts.y.size(); ++i) {
    if (ts.y[i] > 0) {
      model.mean_pos += ts.X.col(i);
      ++n_pos;
    } else {
      model.mean_neg += ts.X.col(i);
      ++n_neg;
    }
  }
  model.mean_pos /= static_cast<double>(n_pos);
  model.mean_neg /= static_cast<double>(n_neg);
  for (Eigen::Index i = 0; i < ts.y.size(); ++i) {
    if (ts.y[i] > 0) {
      model.var_pos +=
          (ts.X.col(i) - model.mean_pos).array().square().matrix();
    } else {
      model.var_neg +=
          (ts.X.col(i) - model.mean_neg).array().square().matrix();
    }
  }
  model.var_pos /= static_cast<double>(n_pos);
  model.var_neg /= static_cast<double>(n_neg);

  constexpr double kVarFloor = 1e-9;
  for (Eigen::Index i = 0; i < m; ++i) {
    if (model.var_pos[i] < kVarFloor) {
      model.var_pos[i] = kVarFloor;
      model.variance_floored = true;
    }
    if (model.var_neg[i] < kVarFloor) {
      model.var_neg[i] = kVarFloor;
      model.variance_floored = true;
    }
  }
  if (model.variance_floored) {
    std::cerr << "sensauth: naive-bayes variance floored at " << kVarFloor
              << "\n";
  }

  const double n = static_cast<double>(n_pos + n_neg);
  model.log_prior_pos = std::log(static_cast<double>(n_pos) / n);
  model.log_prior_neg = std::log(static_cast<double>(n_neg) / n);
  return model;
}

double GaussianNbModel::score(const Eigen::VectorXd& x) const {
  if (x.size() != mean_pos.size()) {
    throw ValidationError("x: dimension mismatch with model");
  }
  auto loglik = [&](const Eigen::VectorXd& mu, const Eigen::VectorXd& var) {
    double ll = 0.0;
    for (Eigen::Index i = 0; i < x.size(); ++i) {
      const double d = x[i] - mu[i];
      ll += -0.5 * (std::log(2.0 * M_PI * var[i]) + d * d / var[i]);
    }
    return ll;
  };
  return (log_prior_pos + loglik(mean_pos, var_pos)) -
         (log_prior_neg + loglik(mean_neg, var_neg));
}

std::string_view to_string(ClassifierKind k) {
  switch (k) {
    case ClassifierKind::KrrPrimal: return "krr";
    case ClassifierKind::KrrDual: return "krr_dual";
    case ClassifierKind::LinearRegression: return "linreg";
    case ClassifierKind::GaussianNaiveBayes: return "naive_bayes";
  }
  return "?";
}

ClassifierKind classifier_from_string(std::string_view s) {
  if (s == "krr" || s == "krr_primal") return ClassifierKind::KrrPrimal;
  if (s == "krr_dual") return ClassifierKind::KrrDual;
  if (s == "linreg" || s == "linear_regression") {
    return ClassifierKind::LinearRegression;
  }
  if (s == "naive_bayes" || s == "gnb") {
    return ClassifierKind::GaussianNaiveBayes;
  }
  throw ValidationError("classifier: unknown value '" + std::string(s) + "'");
}

ScoreFn train_classifier(ClassifierKind kind, const TrainingSet& ts,
                         double rho) {
  const Standardizer norm = Standardizer::fit(ts.X);
  TrainingSet zs{norm.apply_columns(ts.X), ts.y};

  switch (kind) {
    case ClassifierKind::KrrPrimal:
    case ClassifierKind::KrrDual: {
      AuthModel m = kind == ClassifierKind::KrrPrimal ? train_primal(zs, rho)
                                                      : train_dual(zs, rho);
      m.norm = norm;
      return [m = std::move(m)](const Eigen::VectorXd& x) {
        return m.score(x);
      };
    }
    case ClassifierKind::LinearRegression: {
      LinearRegressionModel m = train_linreg(zs);
      return [m = std::move(m), norm](const Eigen::VectorXd& x) {
        return m.score(norm.apply(x));
      };
    }
    case ClassifierKind::GaussianNaiveBayes: {
      GaussianNbModel m = train_gnb(zs);
      return [m = std::move(m), norm](const Eigen::VectorXd& x) {
        return m.score(norm.apply(x));
      };
    }
  }
  throw ValidationError("classifier: unknown kind");
}

}  // namespace sensauth
