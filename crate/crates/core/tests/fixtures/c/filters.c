// Moving-average smoothing.
static const int WINDOW = 3;

/** In-place moving average with window 3. */
void smooth(double data[], int n)
{
    double prev = data[0];
    int i;
    for (i = 1; i < n - 1; i++) {
        double cur = data[i];
        data[i] = (prev + cur + data[i + 1]) / WINDOW; // centred
        prev = cur;
    }
}

/** Clamp every entry into [lo, hi]. */
void clamp(double *data, int n, double lo, double hi)
{
    int i;
    for (i = 0; i < n; i++) {
        if (data[i] < lo) data[i] = lo;
        if (data[i] > hi) data[i] = hi;
    }
}
