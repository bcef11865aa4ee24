/* kelvin is defined by another component; it stays unresolved here. */
extern kelvin to_kelvin(double celsius);

/** Converts a temperature given in Fahrenheit. */
double fahrenheit_to_celsius(double f)
{
    return (f - 32.0) * 5.0 / 9.0;
}

char grade(float score)
{
    return score >= 0.5f ? 'P' : 'F';
}
