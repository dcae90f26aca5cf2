/*@ requires n <= 0; */
int zero_iter(int a[], int n) {
  int i = 0;
  int s = 7;
  while (i < n) {
    a[i] = s;
    s = s + 1;
    i++;
  }
  return s;
}
