/*@ requires n >= 1 && \valid_read(a + (0 .. n-1)); */
int array_min(int a[], int n) {
  int m = a[0];
  int i;
  for (i = 1; i < n; i++) {
    if (a[i] < m) {
      m = a[i];
    }
  }
  return m;
}
