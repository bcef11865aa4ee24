const char SEPARATOR = ';';
const long MODULUS = 65521L;

/** Adler-style checksum of a byte buffer. */
long checksum(const char *buf, long len)
{
    long a = 1, b = 0;
    long i;
    for (i = 0; i < len; i++) {
        a = (a + buf[i]) % MODULUS;
        b = (b + a) % MODULUS;
    }
    return (b << 16) | a;
}

/*@comodi internal */
int is_separator(char c)
{
    const char *all = "; \t";
    return c == all[0] || c == '\\';
}
