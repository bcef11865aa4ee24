/* Uses a random source supplied by another component. */
extern double rng(void);
extern void seed(int s);

/** Estimate of pi from n random points. */
/*@comodi default n = 1000 */
double estimate_pi(int n)
{
    int hits = 0;
    int i;
    seed(7);
    for (i = 0; i < n; i++) {
        double x = rng();
        double y = rng();
        if (x * x + y * y <= 1.0) {
            hits++;
        }
    }
    return 4.0 * hits / n;
}
