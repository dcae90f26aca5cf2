/*@ requires n >= 0 && \valid_read(a + (0 .. n-1)); */
int search_break(int a[], int n, int t) {
  int i;
  for (i = 0; i < n; i++) {
    if (a[i] == t) break;
  }
  return i;
}
