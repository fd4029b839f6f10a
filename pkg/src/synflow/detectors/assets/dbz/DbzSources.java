import java.io.BufferedReader;
import java.util.Scanner;

class DbzSources {
  void sources(Scanner in, BufferedReader reader) throws Exception {
    int a = in.nextInt();
    int b = Integer.parseInt(reader.readLine().trim());
    float c = Float.parseFloat(reader.readLine());
    int d = 0;
    int e;
    e = in.nextInt();
    int f = Integer.MIN_VALUE;
    int g = 2;
    int h = a;
    double k = 0.0;
    int m = Integer.MAX_VALUE;
    String s = reader.readLine();
  }
}
