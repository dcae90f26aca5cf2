/*@ requires n >= 0 && \valid(a + (0 .. n-1)); */
void array_init(int a[], int n) {
  int i;
  for (i = 0; i < n; i++) {
    a[i] = 0;
  }
}
