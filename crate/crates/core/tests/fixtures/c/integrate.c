// Composite trapezoid rule over a function provided by the caller's wiring.

extern double integrand(double x);

/**
 * Integral of the wired integrand over [lo, hi].
 */
/*@comodi default steps = 64 */
double trapezoid(double lo, double hi, int steps)
{
    double h = (hi - lo) / steps;
    double s = 0.5 * (integrand(lo) + integrand(hi));
    int k;
    for (k = 1; k < steps; k++) {
        s += integrand(lo + k * h);
    }
    return s * h;
}
