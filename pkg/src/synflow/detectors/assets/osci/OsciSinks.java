class OsciSinks {
  void sinks(String a, String b, String c, String d) throws Exception {
    Runtime.getRuntime().exec("cmd.exe /c dir " + a);
    Process p = Runtime.getRuntime().exec(b);
    ProcessBuilder pb = new ProcessBuilder(c, "-l");
    pb.command(d);
    System.out.println(d);
    String e = a + b;
  }
}
