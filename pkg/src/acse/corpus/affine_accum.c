/*@ requires n >= 0; */
int affine(int x, int c, int n) {
  int i;
  for (i = 0; i < n; i++) {
    x = x + c;
  }
  return x;
}
