typedef struct {
    double a, b;
    double c, d;
} mat2;

/** Determinant of a 2x2 matrix. */
double det(mat2 m)
{
    return m.a * m.d - m.b * m.c;
}

/** out = x * y */
void mul(mat2 x, mat2 y, mat2 *out)
{
    out->a = x.a * y.a + x.b * y.c;
    out->b = x.a * y.b + x.b * y.d;
    out->c = x.c * y.a + x.d * y.c;
    out->d = x.c * y.b + x.d * y.d;
}

void identity(mat2 *out)
{
    out->a = 1.0; out->b = 0.0;
    out->c = 0.0; out->d = 1.0;
}
