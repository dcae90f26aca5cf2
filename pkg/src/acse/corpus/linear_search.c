/*@ requires n >= 0 && \valid_read(a + (0 .. n-1)); */
int linear_search(int a[], int n, int t) {
  int i = 0;
  while (i < n) {
    if (a[i] == t) {
      return i;
    }
    i++;
  }
  return -1;
}
