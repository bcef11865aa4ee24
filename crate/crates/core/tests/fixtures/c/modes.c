enum method { EULER, MIDPOINT, RK4 = 4, RK45 };

const double TOLERANCE = 1.0e-9, SAFETY = 0.9;
static int evaluations = 0;
long budget = 100000L;
char tag = 'm';

/** Steps per unit time for a method. */
int steps_for(int method)
{
    evaluations++;
    if (method == RK4) {
        return 4;
    }
    return 1;
}
