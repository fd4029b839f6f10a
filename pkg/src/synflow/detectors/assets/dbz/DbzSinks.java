class DbzSinks {
  int sinks(int a, int b, int c, float d, int e) {
    int r = a / b;
    r = r % c;
    float q = 10.0f / d;
    r /= e;
    int s = b / 2;
    int t = (a + 1) / (e);
    t %= (int) c;
    return r + s + t + (int) q;
  }
}
