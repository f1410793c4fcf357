#ifndef CTGIBBS_EXPM_HPP
#define CTGIBBS_EXPM_HPP

#include <Eigen/Dense>

#include <cmath>

namespace ctgibbs {

// Dense matrix exponential by scaling and squaring with a 13/13 Pade
// approximant. Scaling keeps ||A/2^s||_1 below the order-13 threshold.
inline Eigen::MatrixXd expm(const Eigen::MatrixXd& A) {
  const int n = int(A.rows());
  const double theta13 = 5.371920351148152;
  const double b[] = {64764752532480000.0, 32382376266240000.0, 7771770303897600.0,
                      1187353796428800.0,  129060195264000.0,   10559470521600.0,
                      670442572800.0,      33522128640.0,       1323241920.0,
                      40840800.0,          960960.0,            16380.0,
                      182.0,               1.0};

  double norm = A.cwiseAbs().colwise().sum().maxCoeff();
  int squarings = 0;
  if (norm > theta13) {
    squarings = int(std::ceil(std::log2(norm / theta13)));
  }
  Eigen::MatrixXd As = A / std::ldexp(1.0, squarings);

  Eigen::MatrixXd I = Eigen::MatrixXd::Identity(n, n);
  Eigen::MatrixXd A2 = As * As;
  Eigen::MatrixXd A4 = A2 * A2;
  Eigen::MatrixXd A6 = A4 * A2;

  Eigen::MatrixXd U =
      As * (A6 * (b[13] * A6 + b[11] * A4 + b[9] * A2) + b[7] * A6 + b[5] * A4 + b[3] * A2 +
            b[1] * I);
  Eigen::MatrixXd V =
      A6 * (b[12] * A6 + b[10] * A4 + b[8] * A2) + b[6] * A6 + b[4] * A4 + b[2] * A2 + b[0] * I;

  Eigen::MatrixXd F = (V - U).partialPivLu().solve(V + U);
  for (int i = 0; i < squarings; ++i) F = F * F;
  return F;
}

}  // namespace ctgibbs

#endif  // CTGIBBS_EXPM_HPP
