/*@ requires n >= 0 && \valid(a + (0 .. n-1)); */
void array_fill_index(int a[], int n) {
  int i;
  for (i = 0; i < n; i++) {
    a[i] = i + 2;
  }
}
